use std::collections::HashSet;
use std::path::Path;

use super::mesh::load_mesh_asset;
use super::types::*;

/// Collect every structural problem in `doc`. Never fails; an empty list means
/// the document is valid. Mesh file references are not checked here, see
/// [`validate_with_assets`].
pub fn validate(doc: &SceneDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if doc.scenes.is_empty() {
        out.push(Diagnostic::error("/scenes", "empty-document", "document must contain at least one scene"));
    }
    let mut scene_names = HashSet::new();
    for scene in &doc.scenes {
        let path = format!("/scenes/scene[{}]", scene.name);
        if !scene_names.insert(scene.name.as_str()) {
            out.push(Diagnostic::error(&path, "duplicate-scene", format!("scene name '{}' is used twice", scene.name)));
        }
        validate_scene(scene, &path, &mut out);
    }
    out
}

/// [`validate`] plus resolution of convex/trimesh asset files relative to
/// `base_dir`. Unresolvable or malformed mesh assets are reported as errors.
pub fn validate_with_assets(doc: &SceneDocument, base_dir: &Path) -> Vec<Diagnostic> {
    let mut out = validate(doc);
    for scene in &doc.scenes {
        for node in scene.walk() {
            let Some(file) = node.body.as_ref().and_then(|b| b.shape.kind.mesh_file()) else {
                continue;
            };
            let path = format!("/scenes/scene[{}]/node[{}]/body/shape", scene.name, node.name);
            let full = base_dir.join(file);
            if !full.is_file() {
                out.push(Diagnostic::error(&path, "mesh-not-found", format!("mesh asset '{file}' does not resolve")));
                continue;
            }
            match load_mesh_asset(&full) {
                Ok(mesh) if mesh.dropped_degenerate > 0 => out.push(Diagnostic::warning(
                    &path,
                    "degenerate-triangles",
                    format!("mesh asset '{file}': {} degenerate triangles dropped", mesh.dropped_degenerate),
                )),
                Ok(_) => {}
                Err(e) => out.push(Diagnostic::error(&path, "mesh-invalid", format!("mesh asset '{file}': {e}"))),
            }
        }
    }
    out
}

fn validate_scene(scene: &SceneDef, path: &str, out: &mut Vec<Diagnostic>) {
    let a = &scene.attributes;
    let env_path = format!("{path}/environment/clipping");
    if !(a.clip_near > 0.0) {
        out.push(Diagnostic::error(&env_path, "clip-range", format!("near clip {} must be > 0", a.clip_near)));
    } else if !(a.clip_far > a.clip_near) {
        out.push(Diagnostic::error(
            &env_path,
            "clip-range",
            format!("far clip {} must exceed near clip {}", a.clip_far, a.clip_near),
        ));
    }
    if a.ambient.iter().any(|c| !(0.0..=1.0).contains(c)) || !a.gravity.is_finite() {
        out.push(Diagnostic::error(format!("{path}/environment"), "bad-value", "ambient or gravity out of range"));
    }

    let mut names = HashSet::new();
    for node in scene.walk() {
        if !names.insert(node.name.as_str()) {
            out.push(Diagnostic::error(
                format!("{path}/node[{}]", node.name),
                "duplicate-node",
                format!("node name '{}' is used more than once", node.name),
            ));
        }
    }
    for node in scene.walk() {
        validate_node(node, &format!("{path}/node[{}]", node.name), &names, out);
    }
}

fn validate_node(node: &NodeDef, path: &str, names: &HashSet<&str>, out: &mut Vec<Diagnostic>) {
    let qlen = node.orientation.length();
    if !((1.0 - 1e-6)..=(1.0 + 1e-6)).contains(&qlen) {
        out.push(Diagnostic::error(path, "bad-orientation", format!("orientation norm {qlen} is not 1")));
    }
    if !node.position.is_finite() {
        out.push(Diagnostic::error(path, "bad-value", "position must be finite"));
    }
    if node.scale.to_array().iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        out.push(Diagnostic::error(path, "bad-scale", "scale components must be > 0"));
    }
    if let Some(e) = &node.entity {
        if e.mesh_file.is_empty() {
            out.push(Diagnostic::error(format!("{path}/entity"), "bad-value", "meshFile must not be empty"));
        }
    }
    if let Some(l) = &node.light {
        let lp = format!("{path}/light");
        if l.kind != LightKind::Point && l.direction.is_none() {
            out.push(Diagnostic::error(&lp, "missing-element", "directional and spot lights need a direction"));
        }
        if l.kind == LightKind::Spot {
            match l.spot_angles {
                Some((inner, outer)) if inner >= 0.0 && inner <= outer => {}
                _ => out.push(Diagnostic::error(&lp, "bad-value", "spot light needs 0 <= inner <= outer")),
            }
        }
        if l.brightness < 0.0 {
            out.push(Diagnostic::error(&lp, "bad-value", "brightness must be >= 0"));
        }
    }
    if let Some(c) = &node.camera {
        let cp = format!("{path}/camera");
        for (role, target) in [("source", &c.source_node), ("target", &c.target_node)] {
            if !names.contains(target.as_str()) {
                out.push(Diagnostic::error(
                    &cp,
                    "dangling-node-ref",
                    format!("camera {role} node '{target}' does not exist"),
                ));
            }
        }
        if c.source_node == c.target_node {
            out.push(Diagnostic::error(&cp, "camera-self-ref", "camera source and target must differ"));
        }
        if !(c.fov_y > 0.0 && c.fov_y < std::f64::consts::PI) || !(c.aspect > 0.0) {
            out.push(Diagnostic::error(&cp, "bad-value", "fovY must lie in (0, pi) and aspect be > 0"));
        }
    }
    for s in &node.sounds {
        if !(0.0..=1.0).contains(&s.gain) {
            out.push(Diagnostic::error(format!("{path}/sound"), "bad-value", format!("gain {} outside [0, 1]", s.gain)));
        }
    }
    if let Some(b) = &node.body {
        validate_body(node, b, &format!("{path}/body"), out);
    }
}

fn validate_body(node: &NodeDef, body: &BodyDef, path: &str, out: &mut Vec<Diagnostic>) {
    if body.has_graphics && node.entity.is_none() {
        out.push(Diagnostic::error(
            path,
            "body-without-entity",
            format!("node '{}' declares a graphical body but carries no entity", node.name),
        ));
    }
    let p = &body.actor_params;
    match (p.is_static, p.mass) {
        (false, None) => out.push(Diagnostic::error(path, "missing-mass", "dynamic body requires a mass")),
        (false, Some(m)) if !(m > 0.0 && m.is_finite()) => {
            out.push(Diagnostic::error(path, "bad-mass", format!("mass {m} must be > 0")))
        }
        (true, Some(_)) => out.push(Diagnostic::error(path, "static-with-mass", "static body must not carry a mass")),
        _ => {}
    }
    if !(p.skin_width >= 0.0 && p.skin_width.is_finite()) {
        out.push(Diagnostic::error(path, "bad-value", "skin width must be >= 0"));
    }
    if p.group > 31 {
        out.push(Diagnostic::error(path, "bad-group", format!("group {} outside [0, 31]", p.group)));
    }
    let dims_ok = match &body.shape.kind {
        ShapeKind::Cube { half_extents } => half_extents.to_array().iter().all(|h| *h > 0.0 && h.is_finite()),
        ShapeKind::Sphere { radius } => *radius > 0.0 && radius.is_finite(),
        ShapeKind::Capsule { radius, height } => *radius > 0.0 && *height > 0.0 && radius.is_finite() && height.is_finite(),
        ShapeKind::ConvexMesh { file } | ShapeKind::TriangleMesh { file } => !file.is_empty(),
    };
    if !dims_ok {
        out.push(Diagnostic::error(format!("{path}/shape"), "bad-dimension", "shape dimensions must be > 0"));
    }
}
