//! Mutable scene graph instantiated from a [`SceneDef`].
//!
//! Nodes carry a local [`Transform`] and attachments. World transforms are
//! composed on demand and cached per edit generation:
//!
//! ```text
//! position_w    = pos_p + R_p (s_p * pos_c)
//! orientation_w = q_p q_c
//! scale_w       = s_p * s_c
//! ```
//!
//! Non-uniform scale therefore composes component-wise before rotation,
//! which is exact for uniform scale and an approximation for skewed chains.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use glam::{DMat4, DQuat, DVec3};
use thiserror::Error;

use crate::math::is_unit;
use crate::physics::{BodyDesc, BodyId, BodyKind, CollisionShape, PhysicsError, PhysicsWorld, Pose, TriMesh};
use crate::scene_format::{
    load_mesh_asset, validate, validate_with_assets, Diagnostic, EntityDef, LightDef, NodeDef, SceneAttributes,
    SceneDocument, ShapeKind, SoundDef,
};
use crate::spatial::Aabb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown scene '{0}'")]
    UnknownScene(String),
    #[error("scene failed validation: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    ValidationFailed(Vec<Diagnostic>),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("node {0} has no bounds")]
    NoBounds(NodeId),
    #[error("reparenting {child} under {parent} would create a cycle")]
    Cycle { child: NodeId, parent: NodeId },
    #[error("mesh asset {path}: {message}")]
    MeshAsset { path: PathBuf, message: String },
    #[error("node '{node}': {source}")]
    Physics {
        node: String,
        #[source]
        source: PhysicsError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub position: DVec3,
    pub orientation: DQuat,
    pub scale: DVec3,
}

impl Default for Transform {
    fn default() -> Self {
        Transform::IDENTITY
    }
}

impl Transform {
    pub const IDENTITY: Transform = Transform { position: DVec3::ZERO, orientation: DQuat::IDENTITY, scale: DVec3::ONE };

    pub fn new(position: DVec3, orientation: DQuat, scale: DVec3) -> Self {
        Transform { position, orientation, scale }
    }

    pub fn from_position(position: DVec3) -> Self {
        Transform { position, ..Transform::IDENTITY }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.position.is_finite() && self.orientation.is_finite() && self.scale.is_finite()) {
            return Err(SceneError::InvalidTransform("non-finite component".into()));
        }
        if !is_unit(self.orientation, 1e-6) {
            return Err(SceneError::InvalidTransform(format!(
                "orientation norm {} is not 1",
                self.orientation.length()
            )));
        }
        if self.scale.min_element() <= 0.0 {
            return Err(SceneError::InvalidTransform(format!("scale {} must be positive", self.scale)));
        }
        Ok(())
    }

    /// `self` as parent, `child` in its frame.
    pub fn compose(&self, child: &Transform) -> Transform {
        Transform {
            position: self.position + self.orientation * (self.scale * child.position),
            orientation: self.orientation * child.orientation,
            scale: self.scale * child.scale,
        }
    }

    pub fn transform_point(&self, p: DVec3) -> DVec3 {
        self.position + self.orientation * (self.scale * p)
    }

    pub fn to_matrix(&self) -> DMat4 {
        DMat4::from_scale_rotation_translation(self.scale, self.orientation, self.position)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.position, self.orientation)
    }
}

/// A camera anchor with its node names resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraAnchor {
    pub source: NodeId,
    pub target: NodeId,
    pub fov_y: f64,
    pub aspect: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Attachments {
    pub entity: Option<EntityDef>,
    pub light: Option<LightDef>,
    pub camera: Option<CameraAnchor>,
    pub sounds: Vec<SoundDef>,
    /// Node-linked physics body (bodies only, never actors).
    pub body: Option<BodyId>,
    /// Collision shape used for bounds, in node space without scale.
    pub shape: Option<CollisionShape>,
    /// Entity mesh vertices in node space before scale.
    pub mesh: Option<Arc<Vec<DVec3>>>,
}

#[derive(Debug, Clone)]
pub struct SceneNode {
    pub id: NodeId,
    pub name: String,
    pub local: Transform,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub attachments: Attachments,
}

/// A node whose body was marked with the `controller=character` shape
/// parameter. No physics body is created for it; the character controller
/// spawns there instead.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterSpawn {
    pub node: NodeId,
    pub radius: f64,
    pub height: f64,
    pub mass: f64,
    pub skin: f64,
    pub group: u8,
    pub params: Vec<(String, String)>,
}

static NEXT_WORLD_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
pub struct World {
    id: u64,
    nodes: Vec<SceneNode>,
    roots: Vec<NodeId>,
    names: HashMap<String, NodeId>,
    pub physics: PhysicsWorld,
    pub attributes: SceneAttributes,
    actors: Vec<BodyId>,
    character_spawns: Vec<CharacterSpawn>,
    generation: u64,
    cache: RwLock<Vec<Option<(u64, Transform)>>>,
    registry_slot: Arc<AtomicBool>,
}

impl Clone for World {
    fn clone(&self) -> Self {
        World {
            id: NEXT_WORLD_ID.fetch_add(1, Ordering::Relaxed),
            nodes: self.nodes.clone(),
            roots: self.roots.clone(),
            names: self.names.clone(),
            physics: self.physics.clone(),
            attributes: self.attributes.clone(),
            actors: self.actors.clone(),
            character_spawns: self.character_spawns.clone(),
            generation: self.generation,
            cache: RwLock::new(vec![None; self.nodes.len()]),
            registry_slot: Arc::new(AtomicBool::new(false)),
        }
    }
}

impl Default for World {
    fn default() -> Self {
        World::new(SceneAttributes::default())
    }
}

impl World {
    pub fn new(attributes: SceneAttributes) -> Self {
        World {
            id: NEXT_WORLD_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            roots: Vec::new(),
            names: HashMap::new(),
            physics: PhysicsWorld::new(attributes.gravity),
            attributes,
            actors: Vec::new(),
            character_spawns: Vec::new(),
            generation: 0,
            cache: RwLock::new(Vec::new()),
            registry_slot: Arc::new(AtomicBool::new(false)),
        }
    }

    /// Builds a world from a scene whose mesh assets (if any) are resolved
    /// relative to the current directory.
    pub fn instantiate(doc: &SceneDocument, scene_name: &str) -> Result<World, SceneError> {
        World::instantiate_with_assets(doc, scene_name, Path::new("."))
    }

    pub fn instantiate_with_assets(doc: &SceneDocument, scene_name: &str, base_dir: &Path) -> Result<World, SceneError> {
        let scene = doc.scene(scene_name).ok_or_else(|| SceneError::UnknownScene(scene_name.to_string()))?;
        let needs_assets = scene.walk().any(|n| n.body.as_ref().is_some_and(|b| b.shape.kind.mesh_file().is_some()));
        let diags = if needs_assets { validate_with_assets(doc, base_dir) } else { validate(doc) };
        let errors: Vec<Diagnostic> = diags.into_iter().filter(Diagnostic::is_error).collect();
        if !errors.is_empty() {
            return Err(SceneError::ValidationFailed(errors));
        }

        let mut world = World::new(scene.attributes.clone());
        let mut defs: Vec<(NodeId, &NodeDef)> = Vec::new();
        for def in &scene.root_nodes {
            world.build_nodes(def, None, &mut defs);
        }
        let mut meshes = MeshCache { base_dir, loaded: HashMap::new() };
        for &(id, def) in &defs {
            if let Some(cam) = &def.camera {
                let source = world.find(&cam.source_node);
                let target = world.find(&cam.target_node);
                if let (Some(source), Some(target)) = (source, target) {
                    world.nodes[id.0 as usize].attachments.camera =
                        Some(CameraAnchor { source, target, fov_y: cam.fov_y, aspect: cam.aspect });
                }
            }
            if let Some(entity) = &def.entity {
                world.nodes[id.0 as usize].attachments.mesh =
                    meshes.load(&entity.mesh_file).ok().map(|m| Arc::new(m.vertices.clone()));
            }
            if let Some(body) = &def.body {
                world.add_body_for(id, def, body, &mut meshes)?;
            }
        }
        Ok(world)
    }

    fn build_nodes<'a>(&mut self, def: &'a NodeDef, parent: Option<NodeId>, out: &mut Vec<(NodeId, &'a NodeDef)>) {
        let local = Transform::new(def.position, def.orientation, def.scale);
        let id = self.push_node(&def.name, local, parent);
        {
            let a = &mut self.nodes[id.0 as usize].attachments;
            a.entity = def.entity.clone();
            a.light = def.light.clone();
            a.sounds = def.sounds.clone();
        }
        out.push((id, def));
        for child in &def.children {
            self.build_nodes(child, Some(id), out);
        }
    }

    fn push_node(&mut self, name: &str, local: Transform, parent: Option<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(SceneNode {
            id,
            name: name.to_string(),
            local,
            parent,
            children: Vec::new(),
            attachments: Attachments::default(),
        });
        match parent {
            Some(p) => self.nodes[p.0 as usize].children.push(id),
            None => self.roots.push(id),
        }
        self.names.entry(name.to_string()).or_insert(id);
        self.cache.get_mut().unwrap().push(None);
        self.generation += 1;
        id
    }

    fn add_body_for(
        &mut self,
        id: NodeId,
        def: &NodeDef,
        body: &crate::scene_format::BodyDef,
        meshes: &mut MeshCache<'_>,
    ) -> Result<(), SceneError> {
        let world_t = self.world_transform(id)?;
        let skin = body.effective_skin_width();
        let group = body.effective_group();
        if body.shape.param("controller") == Some("character") {
            if let ShapeKind::Capsule { radius, height } = body.shape.kind {
                self.character_spawns.push(CharacterSpawn {
                    node: id,
                    radius,
                    height,
                    mass: body.actor_params.mass.unwrap_or(1.0),
                    skin,
                    group,
                    params: body.shape.params.clone(),
                });
                self.nodes[id.0 as usize].attachments.shape = Some(CollisionShape::capsule(radius, height / 2.0));
                return Ok(());
            }
        }
        let physics_err = |source| SceneError::Physics { node: def.name.clone(), source };
        let shape = match &body.shape.kind {
            ShapeKind::Cube { half_extents } => CollisionShape::cuboid(*half_extents),
            ShapeKind::Sphere { radius } => CollisionShape::sphere(*radius),
            ShapeKind::Capsule { radius, height } => CollisionShape::capsule(*radius, height / 2.0),
            ShapeKind::ConvexMesh { file } => {
                let data = meshes.load(file)?;
                CollisionShape::convex(data.vertices.iter().map(|v| *v * world_t.scale).collect()).map_err(physics_err)?
            }
            ShapeKind::TriangleMesh { file } => {
                let data = meshes.load(file)?;
                CollisionShape::trimesh(TriMesh::from_mesh_data(data, world_t.scale).map_err(physics_err)?)
            }
        };
        let kind = if body.actor_params.is_static { BodyKind::Static } else { BodyKind::Dynamic };
        let mut desc = BodyDesc::new(kind, shape.clone(), world_t.pose()).with_skin(skin).with_group(group);
        desc.mass = body.actor_params.mass;
        if body.has_graphics {
            desc = desc.with_node(id);
        }
        let body_id = self.physics.add_body(desc).map_err(physics_err)?;
        if body.has_graphics {
            let a = &mut self.nodes[id.0 as usize].attachments;
            a.body = Some(body_id);
            a.shape = Some(shape);
        } else {
            self.actors.push(body_id);
        }
        Ok(())
    }

    /// Process-unique identity of this world.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Set while a controller registry is bound to this world.
    pub(crate) fn registry_slot(&self) -> &Arc<AtomicBool> {
        &self.registry_slot
    }

    /// Incremented by every structural or transform edit.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SceneNode> {
        self.nodes.iter()
    }

    pub fn node(&self, id: NodeId) -> Result<&SceneNode, SceneError> {
        self.nodes.get(id.0 as usize).ok_or(SceneError::UnknownNode(id))
    }

    pub fn attachments_mut(&mut self, id: NodeId) -> Result<&mut Attachments, SceneError> {
        self.nodes.get_mut(id.0 as usize).map(|n| &mut n.attachments).ok_or(SceneError::UnknownNode(id))
    }

    /// First node with this name in document order.
    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.names.get(name).copied()
    }

    /// Physics bodies created from actors (no node link).
    pub fn actors(&self) -> &[BodyId] {
        &self.actors
    }

    pub fn character_spawns(&self) -> &[CharacterSpawn] {
        &self.character_spawns
    }

    pub fn add_node(&mut self, name: &str, local: Transform, parent: Option<NodeId>) -> Result<NodeId, SceneError> {
        local.validate()?;
        if let Some(p) = parent {
            self.node(p)?;
        }
        Ok(self.push_node(name, local, parent))
    }

    pub fn set_local_transform(&mut self, id: NodeId, t: Transform) -> Result<(), SceneError> {
        self.node(id)?;
        t.validate()?;
        self.nodes[id.0 as usize].local = t;
        self.generation += 1;
        Ok(())
    }

    /// Sets the node's local transform so that its world position and
    /// orientation become the given pose. Scale is kept.
    pub fn set_world_pose(&mut self, id: NodeId, position: DVec3, orientation: DQuat) -> Result<(), SceneError> {
        let node = self.node(id)?;
        let scale = node.local.scale;
        let local = match node.parent {
            None => Transform::new(position, orientation, scale),
            Some(p) => {
                let pw = self.world_transform(p)?;
                let inv = pw.orientation.conjugate();
                Transform::new((inv * (position - pw.position)) / pw.scale, inv * orientation, scale)
            }
        };
        self.set_local_transform(id, local)
    }

    /// Moves `child` under `parent` (or to the roots), keeping its local
    /// transform. Rejected if `parent` lies in `child`'s subtree.
    pub fn reparent(&mut self, child: NodeId, parent: Option<NodeId>) -> Result<(), SceneError> {
        self.node(child)?;
        if let Some(p) = parent {
            self.node(p)?;
            let mut cur = Some(p);
            while let Some(c) = cur {
                if c == child {
                    return Err(SceneError::Cycle { child, parent: p });
                }
                cur = self.nodes[c.0 as usize].parent;
            }
        }
        match self.nodes[child.0 as usize].parent {
            Some(old) => self.nodes[old.0 as usize].children.retain(|&c| c != child),
            None => self.roots.retain(|&c| c != child),
        }
        self.nodes[child.0 as usize].parent = parent;
        match parent {
            Some(p) => self.nodes[p.0 as usize].children.push(child),
            None => self.roots.push(child),
        }
        self.generation += 1;
        Ok(())
    }

    pub fn world_transform(&self, id: NodeId) -> Result<Transform, SceneError> {
        let node = self.node(id)?;
        if let Some(Some((g, t))) = self.cache.read().unwrap().get(id.0 as usize) {
            if *g == self.generation {
                return Ok(*t);
            }
        }
        let t = match node.parent {
            None => node.local,
            Some(p) => self.world_transform(p)?.compose(&node.local),
        };
        if let Some(slot) = self.cache.write().unwrap().get_mut(id.0 as usize) {
            *slot = Some((self.generation, t));
        }
        Ok(t)
    }

    /// Axis-aligned bounds of the node's collision shape or entity mesh.
    pub fn world_aabb(&self, id: NodeId) -> Result<Aabb, SceneError> {
        let node = self.node(id)?;
        let t = self.world_transform(id)?;
        if let Some(shape) = &node.attachments.shape {
            return Ok(shape.aabb(&t.pose()));
        }
        if let Some(mesh) = &node.attachments.mesh {
            return Aabb::from_points(mesh.iter().map(|&v| t.transform_point(v))).ok_or(SceneError::NoBounds(id));
        }
        if node.attachments.entity.is_some() {
            let corners = (0..8).map(|i| {
                let c = DVec3::new(
                    if i & 1 == 0 { -1.0 } else { 1.0 },
                    if i & 2 == 0 { -1.0 } else { 1.0 },
                    if i & 4 == 0 { -1.0 } else { 1.0 },
                );
                t.transform_point(c)
            });
            return Aabb::from_points(corners).ok_or(SceneError::NoBounds(id));
        }
        Err(SceneError::NoBounds(id))
    }

    /// Every node with bounds, in id order.
    pub fn bounded_nodes(&self) -> Vec<(NodeId, Aabb)> {
        self.nodes.iter().filter_map(|n| self.world_aabb(n.id).ok().map(|b| (n.id, b))).collect()
    }

    /// Copies the pose of every node-linked dynamic body back into its node.
    /// Kinematic bodies are driven from their nodes' owners instead.
    pub fn sync_from_physics(&mut self) -> Result<(), SceneError> {
        let updates: Vec<(NodeId, Pose)> = self
            .physics
            .bodies()
            .filter(|b| b.kind == BodyKind::Dynamic)
            .filter_map(|b| b.linked_node.map(|n| (n, b.pose)))
            .collect();
        for (node, pose) in updates {
            let current = self.world_transform(node)?;
            if current.position != pose.position || current.orientation != pose.orientation {
                self.set_world_pose(node, pose.position, pose.orientation)?;
            }
        }
        Ok(())
    }
}

struct MeshCache<'a> {
    base_dir: &'a Path,
    loaded: HashMap<String, crate::scene_format::TriangleMeshData>,
}

impl MeshCache<'_> {
    fn load(&mut self, file: &str) -> Result<&crate::scene_format::TriangleMeshData, SceneError> {
        if !self.loaded.contains_key(file) {
            let path = self.base_dir.join(file);
            let data = load_mesh_asset(&path).map_err(|e| SceneError::MeshAsset { path, message: e.to_string() })?;
            self.loaded.insert(file.to_string(), data);
        }
        Ok(&self.loaded[file])
    }
}
