//! XML reader for ExDotScene documents and plain DotScene files.

use std::collections::HashSet;

use glam::{DQuat, DVec3};
use roxmltree::{Document, Node};

use super::types::*;
use super::FormatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dialect {
    /// `<scenes>` root with physics, sound and gravity elements.
    Extended,
    /// `<scene>` root, graphics only.
    Plain,
}

/// Parse an ExDotScene byte stream.
pub fn parse_scenes(input: &[u8]) -> Result<SceneDocument, FormatError> {
    let text = decode(input)?;
    let doc = load_xml(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "scenes" {
        return Err(schema("/", "unexpected-root", format!("expected <scenes>, found <{}>", root.tag_name().name())));
    }
    check_attrs(root, "/scenes", &["formatVersion"])?;
    let format_version = required(root, "formatVersion", "/scenes")?.to_string();

    let mut scenes = Vec::new();
    for child in elements(root) {
        match child.tag_name().name() {
            "scene" => scenes.push(parse_scene(child, "/scenes", Dialect::Extended)?),
            other => return Err(unknown_element("/scenes", other)),
        }
    }
    if scenes.is_empty() {
        return Err(schema("/scenes", "missing-element", "document must contain at least one <scene>"));
    }
    Ok(SceneDocument { format_version, scenes })
}

/// Parse a plain DotScene file (single `<scene>` root, no physics).
pub(crate) fn parse_plain_scene(input: &[u8]) -> Result<SceneDef, FormatError> {
    let text = decode(input)?;
    let doc = load_xml(text)?;
    let root = doc.root_element();
    if root.tag_name().name() != "scene" {
        return Err(schema("/", "unexpected-root", format!("expected <scene>, found <{}>", root.tag_name().name())));
    }
    parse_scene(root, "", Dialect::Plain)
}

fn decode(input: &[u8]) -> Result<&str, FormatError> {
    std::str::from_utf8(input).map_err(|e| {
        let prefix = &input[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        let column = (prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1)) as u32 + 1;
        FormatError::Syntax { line, column, message: "input is not valid UTF-8".into() }
    })
}

fn load_xml(text: &str) -> Result<Document<'_>, FormatError> {
    Document::parse(text).map_err(|e| {
        let pos = e.pos();
        FormatError::Syntax { line: pos.row, column: pos.col, message: e.to_string() }
    })
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn schema(path: &str, code: &str, message: impl Into<String>) -> FormatError {
    FormatError::Schema { path: path.to_string(), code: code.to_string(), message: message.into() }
}

fn value_err(path: &str, message: impl Into<String>) -> FormatError {
    FormatError::Value { path: path.to_string(), message: message.into() }
}

fn unknown_element(path: &str, name: &str) -> FormatError {
    schema(path, "unknown-element", format!("unknown element <{name}>"))
}

fn check_attrs(node: Node, path: &str, allowed: &[&str]) -> Result<(), FormatError> {
    for attr in node.attributes() {
        if !allowed.contains(&attr.name()) {
            return Err(schema(path, "unknown-attribute", format!("unknown attribute '{}'", attr.name())));
        }
    }
    Ok(())
}

fn required<'a>(node: Node<'a, '_>, name: &str, path: &str) -> Result<&'a str, FormatError> {
    node.attribute(name)
        .ok_or_else(|| schema(path, "missing-attribute", format!("missing required attribute '{name}'")))
}

fn number(raw: &str, name: &str, path: &str) -> Result<f64, FormatError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| value_err(path, format!("attribute '{name}' is not a number: '{raw}'")))?;
    if !v.is_finite() {
        return Err(value_err(path, format!("attribute '{name}' must be finite")));
    }
    Ok(v)
}

fn req_f64(node: Node, name: &str, path: &str) -> Result<f64, FormatError> {
    number(required(node, name, path)?, name, path)
}

fn opt_f64(node: Node, name: &str, path: &str) -> Result<Option<f64>, FormatError> {
    node.attribute(name).map(|raw| number(raw, name, path)).transpose()
}

fn boolean(raw: &str, name: &str, path: &str) -> Result<bool, FormatError> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(value_err(path, format!("attribute '{name}' must be 'true' or 'false', got '{raw}'"))),
    }
}

fn opt_bool(node: Node, name: &str, path: &str) -> Result<Option<bool>, FormatError> {
    node.attribute(name).map(|raw| boolean(raw, name, path)).transpose()
}

fn vec3(node: Node, names: [&str; 3], path: &str) -> Result<DVec3, FormatError> {
    check_attrs(node, path, &names)?;
    Ok(DVec3::new(req_f64(node, names[0], path)?, req_f64(node, names[1], path)?, req_f64(node, names[2], path)?))
}

fn positive(v: f64, what: &str, path: &str) -> Result<f64, FormatError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(value_err(path, format!("{what} must be > 0, got {v}")))
    }
}

fn unit_interval(v: f64, what: &str, path: &str) -> Result<f64, FormatError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(value_err(path, format!("{what} must lie in [0, 1], got {v}")))
    }
}

fn rgb(node: Node, path: &str) -> Result<[f64; 3], FormatError> {
    let c = vec3(node, ["r", "g", "b"], path)?;
    for v in c.to_array() {
        unit_interval(v, "colour component", path)?;
    }
    Ok(c.to_array())
}

/// Tracks single-occurrence child elements.
struct Once(HashSet<String>);

impl Once {
    fn new() -> Self {
        Once(HashSet::new())
    }

    fn mark(&mut self, name: &str, path: &str) -> Result<(), FormatError> {
        if self.0.insert(name.to_string()) {
            Ok(())
        } else {
            Err(schema(path, "duplicate-element", format!("element <{name}> may appear only once")))
        }
    }
}

fn parse_scene(node: Node, parent: &str, dialect: Dialect) -> Result<SceneDef, FormatError> {
    let name = match dialect {
        Dialect::Extended => {
            check_attrs(node, &format!("{parent}/scene"), &["name"])?;
            required(node, "name", &format!("{parent}/scene"))?.to_string()
        }
        Dialect::Plain => {
            check_attrs(node, "/scene", &["name", "formatVersion"])?;
            node.attribute("name").unwrap_or("scene").to_string()
        }
    };
    let path = match dialect {
        Dialect::Extended => format!("{parent}/scene[{name}]"),
        Dialect::Plain => "/scene".to_string(),
    };
    let mut scene = SceneDef::new(name);
    let mut once = Once::new();
    for child in elements(node) {
        let tag = child.tag_name().name();
        match tag {
            "environment" => {
                once.mark(tag, &path)?;
                scene.attributes = parse_environment(child, &format!("{path}/environment"), dialect)?;
            }
            "nodes" => {
                once.mark(tag, &path)?;
                let nodes_path = format!("{path}/nodes");
                check_attrs(child, &nodes_path, &[])?;
                for n in elements(child) {
                    match n.tag_name().name() {
                        "node" => scene.root_nodes.push(parse_node(n, &nodes_path, dialect)?),
                        other => return Err(unknown_element(&nodes_path, other)),
                    }
                }
            }
            other => return Err(unknown_element(&path, other)),
        }
    }
    Ok(scene)
}

fn parse_environment(node: Node, path: &str, dialect: Dialect) -> Result<SceneAttributes, FormatError> {
    check_attrs(node, path, &[])?;
    let mut attrs = SceneAttributes::default();
    let mut once = Once::new();
    for child in elements(node) {
        let tag = child.tag_name().name();
        let cpath = format!("{path}/{tag}");
        match tag {
            "ambient" => {
                once.mark(tag, path)?;
                attrs.ambient = rgb(child, &cpath)?;
            }
            "shading" => {
                once.mark(tag, path)?;
                check_attrs(child, &cpath, &["type"])?;
                attrs.shading = match required(child, "type", &cpath)? {
                    "flat" => Shading::Flat,
                    "gouraud" => Shading::Gouraud,
                    "phong" => Shading::Phong,
                    other => return Err(value_err(&cpath, format!("unknown shading type '{other}'"))),
                };
            }
            "clipping" => {
                once.mark(tag, path)?;
                check_attrs(child, &cpath, &["near", "far"])?;
                attrs.clip_near = positive(req_f64(child, "near", &cpath)?, "near clip distance", &cpath)?;
                attrs.clip_far = positive(req_f64(child, "far", &cpath)?, "far clip distance", &cpath)?;
            }
            "gravity" if dialect == Dialect::Extended => {
                once.mark(tag, path)?;
                attrs.gravity = vec3(child, ["x", "y", "z"], &cpath)?;
            }
            "mode" => {
                once.mark(tag, path)?;
                check_attrs(child, &cpath, &["value"])?;
                attrs.environment = match required(child, "value", &cpath)? {
                    "indoor" => Environment::Indoor,
                    "outdoor" => Environment::Outdoor,
                    other => return Err(value_err(&cpath, format!("unknown environment mode '{other}'"))),
                };
            }
            other => return Err(unknown_element(path, other)),
        }
    }
    Ok(attrs)
}

fn parse_node(node: Node, parent: &str, dialect: Dialect) -> Result<NodeDef, FormatError> {
    let bare = format!("{parent}/node");
    check_attrs(node, &bare, &["name"])?;
    let name = required(node, "name", &bare)?;
    let path = format!("{parent}/node[{name}]");
    let mut def = NodeDef::new(name);
    let mut once = Once::new();

    for child in elements(node) {
        let tag = child.tag_name().name();
        let cpath = format!("{path}/{tag}");
        match tag {
            "position" => {
                once.mark(tag, &path)?;
                def.position = vec3(child, ["x", "y", "z"], &cpath)?;
            }
            "rotation" => {
                once.mark(tag, &path)?;
                check_attrs(child, &cpath, &["qw", "qx", "qy", "qz"])?;
                let q = DQuat::from_xyzw(
                    req_f64(child, "qx", &cpath)?,
                    req_f64(child, "qy", &cpath)?,
                    req_f64(child, "qz", &cpath)?,
                    req_f64(child, "qw", &cpath)?,
                );
                let len = q.length();
                if !(len > 1e-12) {
                    return Err(value_err(&cpath, "rotation quaternion has zero length"));
                }
                // Leave already-unit quaternions bit-exact so that re-parsing is idempotent.
                def.orientation = if (len - 1.0).abs() > 1e-12 { q / len } else { q };
            }
            "scale" => {
                once.mark(tag, &path)?;
                let s = vec3(child, ["x", "y", "z"], &cpath)?;
                for v in s.to_array() {
                    positive(v, "scale component", &cpath)?;
                }
                def.scale = s;
            }
            "entity" => {
                once.mark(tag, &path)?;
                def.entity = Some(parse_entity(child, &cpath)?);
            }
            "light" => {
                once.mark(tag, &path)?;
                def.light = Some(parse_light(child, &cpath)?);
            }
            "camera" => {
                once.mark(tag, &path)?;
                def.camera = Some(parse_camera(child, &cpath)?);
            }
            "sound" if dialect == Dialect::Extended => def.sounds.push(parse_sound(child, &cpath)?),
            "body" if dialect == Dialect::Extended => {
                once.mark(tag, &path)?;
                def.body = Some(parse_body(child, &cpath)?);
            }
            "node" => def.children.push(parse_node(child, &path, dialect)?),
            other => return Err(unknown_element(&path, other)),
        }
    }
    Ok(def)
}

fn parse_entity(node: Node, path: &str) -> Result<EntityDef, FormatError> {
    check_attrs(node, path, &["meshFile", "material", "castShadows"])?;
    let mesh_file = required(node, "meshFile", path)?;
    if mesh_file.is_empty() {
        return Err(value_err(path, "meshFile must not be empty"));
    }
    Ok(EntityDef {
        mesh_file: mesh_file.to_string(),
        material: node.attribute("material").map(str::to_string),
        cast_shadows: opt_bool(node, "castShadows", path)?.unwrap_or(false),
    })
}

fn parse_light(node: Node, path: &str) -> Result<LightDef, FormatError> {
    check_attrs(node, path, &["type", "brightness", "range"])?;
    let kind = match required(node, "type", path)? {
        "point" => LightKind::Point,
        "directional" => LightKind::Directional,
        "spot" => LightKind::Spot,
        other => return Err(value_err(path, format!("unknown light type '{other}'"))),
    };
    let brightness = opt_f64(node, "brightness", path)?.unwrap_or(1.0);
    if brightness < 0.0 {
        return Err(value_err(path, "brightness must be >= 0"));
    }
    let range = opt_f64(node, "range", path)?;
    if let Some(r) = range {
        if kind == LightKind::Directional {
            return Err(schema(path, "unexpected-attribute", "directional lights take no range"));
        }
        positive(r, "light range", path)?;
    }

    let mut light = LightDef { kind, diffuse: [1.0; 3], direction: None, brightness, range, spot_angles: None };
    let mut once = Once::new();
    for child in elements(node) {
        let tag = child.tag_name().name();
        let cpath = format!("{path}/{tag}");
        match tag {
            "diffuse" => {
                once.mark(tag, path)?;
                light.diffuse = rgb(child, &cpath)?;
            }
            "direction" if kind != LightKind::Point => {
                once.mark(tag, path)?;
                let d = vec3(child, ["x", "y", "z"], &cpath)?;
                let len = d.length();
                if !(len > 1e-12) {
                    return Err(value_err(&cpath, "light direction has zero length"));
                }
                light.direction = Some(if (len - 1.0).abs() > 1e-12 { d / len } else { d });
            }
            "spotRange" if kind == LightKind::Spot => {
                once.mark(tag, path)?;
                check_attrs(child, &cpath, &["inner", "outer"])?;
                let inner = req_f64(child, "inner", &cpath)?;
                let outer = req_f64(child, "outer", &cpath)?;
                if !(inner >= 0.0 && inner <= outer) {
                    return Err(value_err(&cpath, "spot angles must satisfy 0 <= inner <= outer"));
                }
                light.spot_angles = Some((inner, outer));
            }
            other => return Err(unknown_element(path, other)),
        }
    }
    if kind != LightKind::Point && light.direction.is_none() {
        return Err(schema(path, "missing-element", format!("{} light requires <direction>", kind.as_str())));
    }
    if kind == LightKind::Spot && light.spot_angles.is_none() {
        return Err(schema(path, "missing-element", "spot light requires <spotRange inner outer>"));
    }
    Ok(light)
}

fn parse_camera(node: Node, path: &str) -> Result<CameraAnchorDef, FormatError> {
    check_attrs(node, path, &["source", "target", "fovY", "aspect"])?;
    let fov_y = req_f64(node, "fovY", path)?;
    if !(fov_y > 0.0 && fov_y < std::f64::consts::PI) {
        return Err(value_err(path, format!("fovY must lie in (0, pi), got {fov_y}")));
    }
    Ok(CameraAnchorDef {
        source_node: required(node, "source", path)?.to_string(),
        target_node: required(node, "target", path)?.to_string(),
        fov_y,
        aspect: positive(req_f64(node, "aspect", path)?, "aspect", path)?,
    })
}

fn parse_sound(node: Node, path: &str) -> Result<SoundDef, FormatError> {
    check_attrs(node, path, &["file", "positional", "loop", "gain"])?;
    let file = required(node, "file", path)?;
    if file.is_empty() {
        return Err(value_err(path, "sound file must not be empty"));
    }
    Ok(SoundDef {
        file: file.to_string(),
        positional: opt_bool(node, "positional", path)?.unwrap_or(true),
        looping: opt_bool(node, "loop", path)?.unwrap_or(false),
        gain: unit_interval(opt_f64(node, "gain", path)?.unwrap_or(1.0), "gain", path)?,
    })
}

fn parse_body(node: Node, path: &str) -> Result<BodyDef, FormatError> {
    check_attrs(node, path, &["graphics"])?;
    let has_graphics = boolean(required(node, "graphics", path)?, "graphics", path)?;
    let mut shape = None;
    let mut actor_params = None;
    for child in elements(node) {
        let tag = child.tag_name().name();
        let cpath = format!("{path}/{tag}");
        match tag {
            "shape" => {
                if shape.is_some() {
                    return Err(schema(path, "duplicate-element", "a body holds exactly one <shape>"));
                }
                shape = Some(parse_shape(child, &cpath)?);
            }
            "actorParam" => {
                if actor_params.is_some() {
                    return Err(schema(path, "duplicate-element", "a body holds at most one <actorParam>"));
                }
                actor_params = Some(parse_actor_params(child, &cpath)?);
            }
            other => return Err(unknown_element(path, other)),
        }
    }
    let shape = shape.ok_or_else(|| schema(path, "missing-element", "a body requires a <shape> element"))?;
    Ok(BodyDef { has_graphics, shape, actor_params: actor_params.unwrap_or_default() })
}

fn parse_shape(node: Node, path: &str) -> Result<ShapeDef, FormatError> {
    check_attrs(node, path, &[])?;
    let mut kinds = Vec::new();
    let mut params = Vec::new();
    for child in elements(node) {
        let tag = child.tag_name().name();
        let cpath = format!("{path}/{tag}");
        let kind = match tag {
            "cube" => {
                let h = vec3(child, ["hx", "hy", "hz"], &cpath)?;
                for v in h.to_array() {
                    positive(v, "cube half-extent", &cpath)?;
                }
                ShapeKind::Cube { half_extents: h }
            }
            "sphere" => {
                check_attrs(child, &cpath, &["radius"])?;
                ShapeKind::Sphere { radius: positive(req_f64(child, "radius", &cpath)?, "radius", &cpath)? }
            }
            "capsule" => {
                check_attrs(child, &cpath, &["radius", "height"])?;
                ShapeKind::Capsule {
                    radius: positive(req_f64(child, "radius", &cpath)?, "radius", &cpath)?,
                    height: positive(req_f64(child, "height", &cpath)?, "height", &cpath)?,
                }
            }
            "convex" | "trimesh" => {
                check_attrs(child, &cpath, &["file"])?;
                let file = required(child, "file", &cpath)?;
                if file.is_empty() {
                    return Err(value_err(&cpath, "mesh file must not be empty"));
                }
                if tag == "convex" {
                    ShapeKind::ConvexMesh { file: file.to_string() }
                } else {
                    ShapeKind::TriangleMesh { file: file.to_string() }
                }
            }
            "shapeParam" => {
                check_attrs(child, &cpath, &["name", "value"])?;
                let name = required(child, "name", &cpath)?;
                let value = required(child, "value", &cpath)?;
                check_interpreted_param(name, value, &cpath)?;
                params.push((name.to_string(), value.to_string()));
                continue;
            }
            other => return Err(unknown_element(path, other)),
        };
        kinds.push(kind);
    }
    if kinds.len() != 1 {
        return Err(schema(
            path,
            "shape-cardinality",
            format!("a shape must contain one and only one shape element, found {}", kinds.len()),
        ));
    }
    Ok(ShapeDef { kind: kinds.pop().expect("one shape"), params })
}

fn check_interpreted_param(name: &str, value: &str, path: &str) -> Result<(), FormatError> {
    match name {
        "skinWidth" => {
            let v = number(value, "skinWidth", path)?;
            if v < 0.0 {
                return Err(value_err(path, "skinWidth must be >= 0"));
            }
        }
        "group" => {
            let g: u8 = value.parse().map_err(|_| value_err(path, format!("group must be an integer, got '{value}'")))?;
            if g > 31 {
                return Err(value_err(path, format!("group must lie in [0, 31], got {g}")));
            }
        }
        _ => {}
    }
    Ok(())
}

fn parse_actor_params(node: Node, path: &str) -> Result<ActorParams, FormatError> {
    check_attrs(node, path, &["static", "mass", "skin", "group"])?;
    let mut p = ActorParams::default();
    if let Some(s) = opt_bool(node, "static", path)? {
        p.is_static = s;
    }
    if let Some(m) = opt_f64(node, "mass", path)? {
        p.mass = Some(positive(m, "mass", path)?);
    }
    if let Some(skin) = opt_f64(node, "skin", path)? {
        if skin < 0.0 {
            return Err(value_err(path, "skin must be >= 0"));
        }
        p.skin_width = skin;
    }
    if let Some(raw) = node.attribute("group") {
        let g: u8 = raw.parse().map_err(|_| value_err(path, format!("group must be an integer, got '{raw}'")))?;
        if g > 31 {
            return Err(value_err(path, format!("group must lie in [0, 31], got {g}")));
        }
        p.group = g;
    }
    Ok(p)
}
