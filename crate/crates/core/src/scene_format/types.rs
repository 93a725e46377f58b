use std::fmt;

use glam::{DQuat, DVec3};

pub const FORMAT_VERSION: &str = "1.1";

pub const DEFAULT_SKIN_WIDTH: f64 = 0.025;
pub const DEFAULT_GROUP: u8 = 0;
pub const DEFAULT_GRAVITY: DVec3 = DVec3::new(0.0, -9.81, 0.0);
pub const DEFAULT_CLIP_NEAR: f64 = 0.1;
pub const DEFAULT_CLIP_FAR: f64 = 1000.0;

/// A parsed multi-scene document.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDocument {
    pub format_version: String,
    pub scenes: Vec<SceneDef>,
}

impl SceneDocument {
    pub fn scene(&self, name: &str) -> Option<&SceneDef> {
        self.scenes.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDef {
    pub name: String,
    pub attributes: SceneAttributes,
    pub root_nodes: Vec<NodeDef>,
}

impl SceneDef {
    pub fn new(name: impl Into<String>) -> Self {
        SceneDef { name: name.into(), attributes: SceneAttributes::default(), root_nodes: Vec::new() }
    }

    /// Depth-first, document-order walk over every node of the scene.
    pub fn walk(&self) -> impl Iterator<Item = &NodeDef> {
        let mut stack: Vec<&NodeDef> = self.root_nodes.iter().rev().collect();
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    pub fn find_node(&self, name: &str) -> Option<&NodeDef> {
        self.walk().find(|n| n.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Environment {
    Indoor,
    Outdoor,
}

impl Environment {
    pub fn as_str(self) -> &'static str {
        match self {
            Environment::Indoor => "indoor",
            Environment::Outdoor => "outdoor",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shading {
    Flat,
    Gouraud,
    Phong,
}

impl Shading {
    pub fn as_str(self) -> &'static str {
        match self {
            Shading::Flat => "flat",
            Shading::Gouraud => "gouraud",
            Shading::Phong => "phong",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneAttributes {
    pub environment: Environment,
    pub shading: Shading,
    pub clip_near: f64,
    pub clip_far: f64,
    pub ambient: [f64; 3],
    pub gravity: DVec3,
}

impl Default for SceneAttributes {
    fn default() -> Self {
        SceneAttributes {
            environment: Environment::Outdoor,
            shading: Shading::Phong,
            clip_near: DEFAULT_CLIP_NEAR,
            clip_far: DEFAULT_CLIP_FAR,
            ambient: [0.0; 3],
            gravity: DEFAULT_GRAVITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDef {
    pub name: String,
    pub position: DVec3,
    /// Stored as a unit quaternion; parsing normalizes the `qw qx qy qz` attributes.
    pub orientation: DQuat,
    pub scale: DVec3,
    pub entity: Option<EntityDef>,
    pub light: Option<LightDef>,
    pub camera: Option<CameraAnchorDef>,
    pub sounds: Vec<SoundDef>,
    pub body: Option<BodyDef>,
    pub children: Vec<NodeDef>,
}

impl NodeDef {
    pub fn new(name: impl Into<String>) -> Self {
        NodeDef {
            name: name.into(),
            position: DVec3::ZERO,
            orientation: DQuat::IDENTITY,
            scale: DVec3::ONE,
            entity: None,
            light: None,
            camera: None,
            sounds: Vec::new(),
            body: None,
            children: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityDef {
    pub mesh_file: String,
    pub material: Option<String>,
    pub cast_shadows: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightKind {
    Point,
    Directional,
    Spot,
}

impl LightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LightKind::Point => "point",
            LightKind::Directional => "directional",
            LightKind::Spot => "spot",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LightDef {
    pub kind: LightKind,
    pub diffuse: [f64; 3],
    /// Present for directional and spot lights.
    pub direction: Option<DVec3>,
    pub brightness: f64,
    /// Present for point and spot lights.
    pub range: Option<f64>,
    /// `(inner, outer)` cone angles in radians, spot lights only.
    pub spot_angles: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraAnchorDef {
    pub source_node: String,
    pub target_node: String,
    pub fov_y: f64,
    pub aspect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundDef {
    pub file: String,
    pub positional: bool,
    pub looping: bool,
    pub gain: f64,
}

/// A physical object attached to a node. `has_graphics` distinguishes a body
/// (rendered) from an actor (physics only).
#[derive(Debug, Clone, PartialEq)]
pub struct BodyDef {
    pub has_graphics: bool,
    pub shape: ShapeDef,
    pub actor_params: ActorParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Cube { half_extents: DVec3 },
    Sphere { radius: f64 },
    /// `height` is the cylinder segment length, caps excluded.
    Capsule { radius: f64, height: f64 },
    ConvexMesh { file: String },
    TriangleMesh { file: String },
}

impl ShapeKind {
    pub fn tag(&self) -> &'static str {
        match self {
            ShapeKind::Cube { .. } => "cube",
            ShapeKind::Sphere { .. } => "sphere",
            ShapeKind::Capsule { .. } => "capsule",
            ShapeKind::ConvexMesh { .. } => "convex",
            ShapeKind::TriangleMesh { .. } => "trimesh",
        }
    }

    pub fn mesh_file(&self) -> Option<&str> {
        match self {
            ShapeKind::ConvexMesh { file } | ShapeKind::TriangleMesh { file } => Some(file),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDef {
    pub kind: ShapeKind,
    /// Opaque `(name, value)` pairs, kept verbatim and in order.
    pub params: Vec<(String, String)>,
}

impl ShapeDef {
    pub fn new(kind: ShapeKind) -> Self {
        ShapeDef { kind, params: Vec::new() }
    }

    pub fn param(&self, name: &str) -> Option<&str> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorParams {
    pub is_static: bool,
    pub mass: Option<f64>,
    pub skin_width: f64,
    pub group: u8,
}

impl Default for ActorParams {
    fn default() -> Self {
        ActorParams { is_static: false, mass: None, skin_width: DEFAULT_SKIN_WIDTH, group: DEFAULT_GROUP }
    }
}

impl BodyDef {
    /// Skin width after applying a `skinWidth` shape parameter override.
    pub fn effective_skin_width(&self) -> f64 {
        self.shape
            .param("skinWidth")
            .and_then(|v| v.parse::<f64>().ok())
            .unwrap_or(self.actor_params.skin_width)
    }

    /// Collision group after applying a `group` shape parameter override.
    pub fn effective_group(&self) -> u8 {
        self.shape
            .param("group")
            .and_then(|v| v.parse::<u8>().ok())
            .unwrap_or(self.actor_params.group)
    }
}

/// Per-object physics settings as authored in the modeling tool's logic panel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogicProperties {
    pub body: Option<bool>,
    pub shape: Option<String>,
    pub is_static: Option<bool>,
    pub mass: Option<f64>,
    pub skin: Option<f64>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub code: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(path: impl Into<String>, code: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, path: path.into(), code: code.to_string(), message: message.into() }
    }

    pub fn warning(path: impl Into<String>, code: &str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, path: path.into(), code: code.to_string(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.severity.as_str(), self.path, self.code, self.message)
    }
}
