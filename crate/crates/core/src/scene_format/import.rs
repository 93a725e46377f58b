//! Conversion of plain DotScene files plus a logic-properties sidecar into
//! ExDotScene, following the exporter's mapping rules.

use std::collections::{BTreeMap, HashSet};

use super::parse::parse_plain_scene;
use super::types::*;
use super::{validate, FormatError};

const KEYS: [&str; 6] = ["body", "shape", "static", "mass", "skin", "file"];

/// Properties keyed by node name.
pub type PropertyMap = BTreeMap<String, LogicProperties>;

/// Parse the `node-name.key = value` sidecar. Node names may themselves
/// contain dots; the key is the text after the last dot.
pub fn parse_properties(text: &str) -> Result<PropertyMap, FormatError> {
    let mut map = PropertyMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| FormatError::Properties { line: line_no, message };
        let (lhs, value) = line.split_once('=').ok_or_else(|| err("expected 'node.key = value'".into()))?;
        let (lhs, value) = (lhs.trim(), value.trim());
        let (node, key) = lhs.rsplit_once('.').ok_or_else(|| err(format!("'{lhs}' lacks a '.key' suffix")))?;
        if node.is_empty() {
            return Err(err("empty node name".into()));
        }
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key '{key}', expected one of {}", KEYS.join(", "))));
        }
        let props = map.entry(node.to_string()).or_default();
        let dup = || err(format!("duplicate key '{key}' for node '{node}'"));
        let as_bool = |v: &str| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(err(format!("'{key}' expects true or false, got '{v}'"))),
        };
        let as_num = |v: &str| match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(err(format!("'{key}' expects a number, got '{v}'"))),
        };
        match key {
            "body" => {
                if props.body.replace(as_bool(value)?).is_some() {
                    return Err(dup());
                }
            }
            "shape" => {
                if props.shape.replace(value.to_string()).is_some() {
                    return Err(dup());
                }
            }
            "static" => {
                if props.is_static.replace(as_bool(value)?).is_some() {
                    return Err(dup());
                }
            }
            "mass" => {
                if props.mass.replace(as_num(value)?).is_some() {
                    return Err(dup());
                }
            }
            "skin" => {
                if props.skin.replace(as_num(value)?).is_some() {
                    return Err(dup());
                }
            }
            "file" => {
                if props.file.replace(value.to_string()).is_some() {
                    return Err(dup());
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(map)
}

/// Result of a successful conversion. `diagnostics` only ever holds warnings.
#[derive(Debug, Clone)]
pub struct ImportOutcome {
    pub document: SceneDocument,
    pub diagnostics: Vec<Diagnostic>,
}

/// Convert a plain DotScene document. Nodes named in `properties` receive a
/// body; all others stay graphics-only.
pub fn import_dotscene(input: &[u8], properties: &PropertyMap) -> Result<ImportOutcome, FormatError> {
    let mut scene = parse_plain_scene(input)?;
    let mut diagnostics = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    let scene_path = format!("/scenes/scene[{}]", scene.name);
    for node in &mut scene.root_nodes {
        map_node(node, properties, &scene_path, &mut seen, &mut diagnostics, &mut errors);
    }
    for name in properties.keys() {
        if !seen.contains(name.as_str()) {
            errors.push(Diagnostic::error(
                format!("{scene_path}/node[{name}]"),
                "unknown-node",
                format!("properties name node '{name}', which is not in the scene"),
            ));
        }
    }
    if !errors.is_empty() {
        return Err(FormatError::Mapping(errors));
    }
    let document = SceneDocument { format_version: FORMAT_VERSION.to_string(), scenes: vec![scene] };
    let problems: Vec<Diagnostic> = validate(&document).into_iter().filter(Diagnostic::is_error).collect();
    if !problems.is_empty() {
        return Err(FormatError::Mapping(problems));
    }
    Ok(ImportOutcome { document, diagnostics })
}

fn map_node(
    node: &mut NodeDef,
    properties: &PropertyMap,
    parent: &str,
    seen: &mut HashSet<String>,
    warnings: &mut Vec<Diagnostic>,
    errors: &mut Vec<Diagnostic>,
) {
    let path = format!("{parent}/node[{}]", node.name);
    if let Some(props) = properties.get(&node.name) {
        seen.insert(node.name.clone());
        match body_from_properties(node, props, &path, warnings) {
            Ok(body) => node.body = Some(body),
            Err(e) => errors.extend(e),
        }
    }
    for child in &mut node.children {
        map_node(child, properties, &path, seen, warnings, errors);
    }
}

fn body_from_properties(
    node: &NodeDef,
    props: &LogicProperties,
    path: &str,
    warnings: &mut Vec<Diagnostic>,
) -> Result<BodyDef, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let name = &node.name;
    let has_graphics = props.body.unwrap_or(true);
    let is_static = props.is_static.unwrap_or(false);
    let s = node.scale;

    let kind = match props.shape.as_deref() {
        None => {
            errors.push(Diagnostic::error(path, "missing-shape", format!("node '{name}': no shape property")));
            None
        }
        // Primitive sizes come from the node scale applied to unit half-extents.
        Some("cube") => Some(ShapeKind::Cube { half_extents: s }),
        Some("sphere") => Some(ShapeKind::Sphere { radius: s.max_element() }),
        Some("capsule") => Some(ShapeKind::Capsule { radius: s.x.max(s.z), height: 2.0 * s.y }),
        Some(mesh @ ("convex" | "trimesh")) => match &props.file {
            Some(file) if !file.is_empty() => Some(if mesh == "convex" {
                ShapeKind::ConvexMesh { file: file.clone() }
            } else {
                ShapeKind::TriangleMesh { file: file.clone() }
            }),
            _ => {
                errors.push(Diagnostic::error(
                    path,
                    "missing-file",
                    format!("node '{name}': shape={mesh} requires a file property"),
                ));
                None
            }
        },
        Some(other) => {
            errors.push(Diagnostic::error(path, "unknown-shape", format!("node '{name}': unknown shape '{other}'")));
            None
        }
    };
    if let (Some(kind), Some(_)) = (&kind, &props.file) {
        if kind.mesh_file().is_none() {
            warnings.push(Diagnostic::warning(path, "file-ignored", format!("node '{name}': file ignored for {}", kind.tag())));
        }
    }
    if matches!(kind, Some(ShapeKind::TriangleMesh { .. })) && !is_static {
        errors.push(Diagnostic::error(path, "dynamic-trimesh", format!("node '{name}': triangle meshes must be static")));
    }

    let mass = match (is_static, props.mass) {
        (true, Some(m)) => {
            warnings.push(Diagnostic::warning(
                path,
                "mass-ignored",
                format!("node '{name}': mass {m} given for a static object was dropped"),
            ));
            None
        }
        (true, None) => None,
        (false, Some(m)) if m > 0.0 => Some(m),
        (false, Some(m)) => {
            errors.push(Diagnostic::error(path, "bad-mass", format!("node '{name}': mass {m} must be > 0")));
            None
        }
        (false, None) => {
            errors.push(Diagnostic::error(path, "missing-mass", format!("node '{name}': dynamic object needs a mass")));
            None
        }
    };
    let skin_width = props.skin.unwrap_or(DEFAULT_SKIN_WIDTH);
    if skin_width < 0.0 {
        errors.push(Diagnostic::error(path, "bad-skin", format!("node '{name}': skin must be >= 0")));
    }
    if has_graphics && node.entity.is_none() {
        errors.push(Diagnostic::error(
            path,
            "body-without-entity",
            format!("node '{name}': body=true requires an entity; set body=false for an actor"),
        ));
    }
    match kind {
        Some(kind) if errors.is_empty() => Ok(BodyDef {
            has_graphics,
            shape: ShapeDef::new(kind),
            actor_params: ActorParams { is_static, mass, skin_width, group: DEFAULT_GROUP },
        }),
        _ => Err(errors),
    }
}
