//! Canonical ExDotScene writer. Element order follows the document, attribute
//! order is fixed, and every scalar is written as its shortest round-trip
//! decimal, so the output is byte-stable.

use std::fmt::Write as _;

use glam::DVec3;

use super::types::*;
use super::{validate, FormatError};

/// Serialize a document. Fails with [`FormatError::InvalidDocument`] when
/// validation reports errors.
pub fn serialize_scenes(doc: &SceneDocument) -> Result<Vec<u8>, FormatError> {
    let errors: Vec<Diagnostic> = validate(doc).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(FormatError::InvalidDocument(errors));
    }
    Ok(write_document(doc).into_bytes())
}

pub(crate) fn write_document(doc: &SceneDocument) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<scenes formatVersion=\"{}\">", escape(&doc.format_version));
    for scene in &doc.scenes {
        write_scene(&mut out, scene, 1);
    }
    out.push_str("</scenes>\n");
    out
}

/// Shortest round-trip decimal spelling of `v`, with `-0` written as `0`.
pub fn num(v: f64) -> String {
    // -0 and 0 compare equal; keep one spelling.
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn vec_attrs(v: DVec3, names: [&str; 3]) -> String {
    format!("{}=\"{}\" {}=\"{}\" {}=\"{}\"", names[0], num(v.x), names[1], num(v.y), names[2], num(v.z))
}

fn rgb_attrs(c: [f64; 3]) -> String {
    format!("r=\"{}\" g=\"{}\" b=\"{}\"", num(c[0]), num(c[1]), num(c[2]))
}

fn write_scene(out: &mut String, scene: &SceneDef, depth: usize) {
    let a = &scene.attributes;
    indent(out, depth);
    let _ = writeln!(out, "<scene name=\"{}\">", escape(&scene.name));
    indent(out, depth + 1);
    out.push_str("<environment>\n");
    let lines = [
        format!("<mode value=\"{}\"/>", a.environment.as_str()),
        format!("<shading type=\"{}\"/>", a.shading.as_str()),
        format!("<clipping near=\"{}\" far=\"{}\"/>", num(a.clip_near), num(a.clip_far)),
        format!("<ambient {}/>", rgb_attrs(a.ambient)),
        format!("<gravity {}/>", vec_attrs(a.gravity, ["x", "y", "z"])),
    ];
    for line in lines {
        indent(out, depth + 2);
        out.push_str(&line);
        out.push('\n');
    }
    indent(out, depth + 1);
    out.push_str("</environment>\n");
    indent(out, depth + 1);
    if scene.root_nodes.is_empty() {
        out.push_str("<nodes/>\n");
    } else {
        out.push_str("<nodes>\n");
        for node in &scene.root_nodes {
            write_node(out, node, depth + 2);
        }
        indent(out, depth + 1);
        out.push_str("</nodes>\n");
    }
    indent(out, depth);
    out.push_str("</scene>\n");
}

fn write_node(out: &mut String, node: &NodeDef, depth: usize) {
    indent(out, depth);
    let _ = writeln!(out, "<node name=\"{}\">", escape(&node.name));
    let inner = depth + 1;
    let q = node.orientation;
    let line = |out: &mut String, s: String| {
        indent(out, inner);
        out.push_str(&s);
        out.push('\n');
    };
    line(out, format!("<position {}/>", vec_attrs(node.position, ["x", "y", "z"])));
    line(
        out,
        format!("<rotation qw=\"{}\" qx=\"{}\" qy=\"{}\" qz=\"{}\"/>", num(q.w), num(q.x), num(q.y), num(q.z)),
    );
    line(out, format!("<scale {}/>", vec_attrs(node.scale, ["x", "y", "z"])));

    if let Some(e) = &node.entity {
        let mut s = format!("<entity meshFile=\"{}\"", escape(&e.mesh_file));
        if let Some(m) = &e.material {
            let _ = write!(s, " material=\"{}\"", escape(m));
        }
        let _ = write!(s, " castShadows=\"{}\"/>", e.cast_shadows);
        line(out, s);
    }
    if let Some(l) = &node.light {
        write_light(out, l, inner);
    }
    if let Some(c) = &node.camera {
        line(
            out,
            format!(
                "<camera source=\"{}\" target=\"{}\" fovY=\"{}\" aspect=\"{}\"/>",
                escape(&c.source_node),
                escape(&c.target_node),
                num(c.fov_y),
                num(c.aspect)
            ),
        );
    }
    for s in &node.sounds {
        line(
            out,
            format!(
                "<sound file=\"{}\" positional=\"{}\" loop=\"{}\" gain=\"{}\"/>",
                escape(&s.file),
                s.positional,
                s.looping,
                num(s.gain)
            ),
        );
    }
    if let Some(b) = &node.body {
        write_body(out, b, inner);
    }
    for child in &node.children {
        write_node(out, child, inner);
    }
    indent(out, depth);
    out.push_str("</node>\n");
}

fn write_light(out: &mut String, l: &LightDef, depth: usize) {
    indent(out, depth);
    let _ = write!(out, "<light type=\"{}\" brightness=\"{}\"", l.kind.as_str(), num(l.brightness));
    if let Some(r) = l.range {
        let _ = write!(out, " range=\"{}\"", num(r));
    }
    out.push_str(">\n");
    indent(out, depth + 1);
    let _ = writeln!(out, "<diffuse {}/>", rgb_attrs(l.diffuse));
    if let Some(d) = l.direction {
        indent(out, depth + 1);
        let _ = writeln!(out, "<direction {}/>", vec_attrs(d, ["x", "y", "z"]));
    }
    if let Some((inner, outer)) = l.spot_angles {
        indent(out, depth + 1);
        let _ = writeln!(out, "<spotRange inner=\"{}\" outer=\"{}\"/>", num(inner), num(outer));
    }
    indent(out, depth);
    out.push_str("</light>\n");
}

fn write_body(out: &mut String, b: &BodyDef, depth: usize) {
    indent(out, depth);
    let _ = writeln!(out, "<body graphics=\"{}\">", b.has_graphics);
    indent(out, depth + 1);
    out.push_str("<shape>\n");
    indent(out, depth + 2);
    match &b.shape.kind {
        ShapeKind::Cube { half_extents } => {
            let _ = writeln!(out, "<cube {}/>", vec_attrs(*half_extents, ["hx", "hy", "hz"]));
        }
        ShapeKind::Sphere { radius } => {
            let _ = writeln!(out, "<sphere radius=\"{}\"/>", num(*radius));
        }
        ShapeKind::Capsule { radius, height } => {
            let _ = writeln!(out, "<capsule radius=\"{}\" height=\"{}\"/>", num(*radius), num(*height));
        }
        ShapeKind::ConvexMesh { file } => {
            let _ = writeln!(out, "<convex file=\"{}\"/>", escape(file));
        }
        ShapeKind::TriangleMesh { file } => {
            let _ = writeln!(out, "<trimesh file=\"{}\"/>", escape(file));
        }
    }
    for (name, value) in &b.shape.params {
        indent(out, depth + 2);
        let _ = writeln!(out, "<shapeParam name=\"{}\" value=\"{}\"/>", escape(name), escape(value));
    }
    indent(out, depth + 1);
    out.push_str("</shape>\n");
    indent(out, depth + 1);
    let p = &b.actor_params;
    let _ = write!(out, "<actorParam static=\"{}\"", p.is_static);
    if let Some(m) = p.mass {
        let _ = write!(out, " mass=\"{}\"", num(m));
    }
    let _ = writeln!(out, " skin=\"{}\" group=\"{}\"/>", num(p.skin_width), p.group);
    indent(out, depth);
    out.push_str("</body>\n");
}
