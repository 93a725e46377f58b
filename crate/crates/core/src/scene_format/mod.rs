//! The ExDotScene format: an XML scene description extended with physics
//! bodies, actors, shapes and sound sources.
//!
//! * [`parse_scenes`] reads a multi-scene document, filling defaults and
//!   normalizing orientations.
//! * [`serialize_scenes`] writes the canonical, byte-stable form back out.
//! * [`validate`] collects every structural problem as a [`Diagnostic`].
//! * [`import_dotscene`] converts a plain DotScene file plus a logic-properties
//!   sidecar, reproducing the exporter's body/shape/static/mass/skin/file rules.
//! * [`load_mesh_asset`] reads the text mesh files referenced by convex and
//!   triangle-mesh shapes.

mod import;
mod mesh;
mod parse;
mod serialize;
mod types;
mod validate;

use thiserror::Error;

pub use import::{import_dotscene, parse_properties, ImportOutcome, PropertyMap};
pub use mesh::{load_mesh_asset, parse_mesh_asset, MeshError, TriangleMeshData, DEGENERATE_AREA};
pub use parse::parse_scenes;
pub use serialize::serialize_scenes;
pub use types::*;
pub use validate::{validate, validate_with_assets};

pub use serialize::num as format_number;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: u32, column: u32, message: String },
    #[error("schema error at {path} ({code}): {message}")]
    Schema { path: String, code: String, message: String },
    #[error("value error at {path}: {message}")]
    Value { path: String, message: String },
    #[error("properties line {line}: {message}")]
    Properties { line: usize, message: String },
    #[error("document is invalid: {}", summarize(.0))]
    InvalidDocument(Vec<Diagnostic>),
    #[error("mapping failed: {}", summarize(.0))]
    Mapping(Vec<Diagnostic>),
}

impl FormatError {
    /// Stable identifier of a schema error, if this is one.
    pub fn code(&self) -> Option<&str> {
        match self {
            FormatError::Schema { code, .. } => Some(code),
            _ => None,
        }
    }
}

fn summarize(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{} {}", d.code, d.message)).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests {
    use glam::{DQuat, DVec3};

    use super::*;

    const MINIMAL: &str = r#"<scenes formatVersion="1.1"><scene name="main"><nodes><node name="a"/></nodes></scene></scenes>"#;

    fn doc_with_body(body: &str) -> String {
        format!(
            r#"<scenes formatVersion="1.1"><scene name="s"><nodes>
            <node name="n"><entity meshFile="n.mesh"/>{body}</node>
            </nodes></scene></scenes>"#
        )
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let doc = parse_scenes(MINIMAL.as_bytes()).unwrap();
        assert_eq!(doc.scenes.len(), 1);
        let node = &doc.scenes[0].root_nodes[0];
        assert_eq!(node.name, "a");
        assert_eq!(node.position, DVec3::ZERO);
        assert_eq!(node.orientation, DQuat::IDENTITY);
        assert_eq!(node.scale, DVec3::ONE);
        let attrs = &doc.scenes[0].attributes;
        assert_eq!(attrs.gravity, DVec3::new(0.0, -9.81, 0.0));
        assert_eq!(attrs.shading, Shading::Phong);
        assert_eq!((attrs.clip_near, attrs.clip_far), (0.1, 1000.0));
    }

    #[test]
    fn capsule_body_maps_directly() {
        let xml = doc_with_body(
            r#"<body graphics="true"><shape><capsule radius="0.5" height="1.8"/></shape>
               <actorParam static="false" mass="80"/></body>"#,
        );
        let doc = parse_scenes(xml.as_bytes()).unwrap();
        let body = doc.scenes[0].root_nodes[0].body.as_ref().unwrap();
        assert!(body.has_graphics);
        assert_eq!(body.shape.kind, ShapeKind::Capsule { radius: 0.5, height: 1.8 });
        assert_eq!(body.actor_params.mass, Some(80.0));
        assert_eq!(body.actor_params.skin_width, DEFAULT_SKIN_WIDTH);
        assert_eq!(body.actor_params.group, 0);
    }

    #[test]
    fn two_shapes_violate_cardinality() {
        let xml = doc_with_body(
            r#"<body graphics="true"><shape><cube hx="1" hy="1" hz="1"/><sphere radius="1"/></shape></body>"#,
        );
        let err = parse_scenes(xml.as_bytes()).unwrap_err();
        assert_eq!(err.code(), Some("shape-cardinality"));
        let xml = doc_with_body(r#"<body graphics="true"><shape><shapeParam name="a" value="b"/></shape></body>"#);
        assert_eq!(parse_scenes(xml.as_bytes()).unwrap_err().code(), Some("shape-cardinality"));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_scenes(b"<scenes formatVersion=\"1.1\">\n  <scene name=\"x\">\n</scenes>").unwrap_err();
        match err {
            FormatError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_and_value_errors() {
        let unknown = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a"><bogus/></node></nodes></scene></scenes>"#;
        assert_eq!(parse_scenes(unknown.as_bytes()).unwrap_err().code(), Some("unknown-element"));
        let missing = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a"><position x="1" y="2"/></node></nodes></scene></scenes>"#;
        assert_eq!(parse_scenes(missing.as_bytes()).unwrap_err().code(), Some("missing-attribute"));
        let nan = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a"><position x="1" y="abc" z="0"/></node></nodes></scene></scenes>"#;
        assert!(matches!(parse_scenes(nan.as_bytes()), Err(FormatError::Value { .. })));
        let scale = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a"><scale x="1" y="0" z="1"/></node></nodes></scene></scenes>"#;
        assert!(matches!(parse_scenes(scale.as_bytes()), Err(FormatError::Value { .. })));
        let group = doc_with_body(
            r#"<body graphics="true"><shape><sphere radius="1"/></shape><actorParam mass="1" group="32"/></body>"#,
        );
        assert!(matches!(parse_scenes(group.as_bytes()), Err(FormatError::Value { .. })));
    }

    #[test]
    fn quaternion_is_normalized() {
        let xml = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a"><rotation qw="2" qx="0" qy="2" qz="0"/></node></nodes></scene></scenes>"#;
        let doc = parse_scenes(xml.as_bytes()).unwrap();
        let q = doc.scenes[0].root_nodes[0].orientation;
        assert!((q.length() - 1.0).abs() < 1e-12);
        assert!((q.y - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn round_trip_and_determinism() {
        let doc = parse_scenes(MINIMAL.as_bytes()).unwrap();
        let a = serialize_scenes(&doc).unwrap();
        let b = serialize_scenes(&doc).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_scenes(&a).unwrap(), doc);
    }

    #[test]
    fn two_scenes_keep_order() {
        let mut doc = parse_scenes(MINIMAL.as_bytes()).unwrap();
        doc.scenes.push(SceneDef::new("second"));
        let text = String::from_utf8(serialize_scenes(&doc).unwrap()).unwrap();
        let first = text.find("<scene name=\"main\"").unwrap();
        let second = text.find("<scene name=\"second\"").unwrap();
        assert!(first < second);
        assert_eq!(parse_scenes(text.as_bytes()).unwrap(), doc);
    }

    #[test]
    fn serialize_rejects_invalid() {
        let mut doc = parse_scenes(MINIMAL.as_bytes()).unwrap();
        doc.scenes[0].attributes.clip_far = 0.05;
        assert!(matches!(serialize_scenes(&doc), Err(FormatError::InvalidDocument(_))));
    }

    #[test]
    fn validate_reports_problems() {
        let mut scene = SceneDef::new("s");
        let mut cam = NodeDef::new("cam");
        cam.camera = Some(CameraAnchorDef {
            source_node: "cam".into(),
            target_node: "ghost".into(),
            fov_y: 1.0,
            aspect: 1.5,
        });
        let mut crate_node = NodeDef::new("crate");
        crate_node.body = Some(BodyDef {
            has_graphics: true,
            shape: ShapeDef::new(ShapeKind::Sphere { radius: 1.0 }),
            actor_params: ActorParams::default(),
        });
        scene.root_nodes = vec![cam, crate_node.clone(), NodeDef { children: vec![], ..NodeDef::new("cam") }];
        scene.attributes.clip_far = 0.1;
        let doc = SceneDocument { format_version: "1.1".into(), scenes: vec![scene] };
        let codes: Vec<String> = validate(&doc).into_iter().map(|d| d.code).collect();
        for expected in ["dangling-node-ref", "body-without-entity", "missing-mass", "duplicate-node", "clip-range"] {
            assert!(codes.iter().any(|c| c == expected), "missing {expected} in {codes:?}");
        }
    }

    #[test]
    fn validate_assets_reports_missing_mesh() {
        let xml = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="t">
            <body graphics="false"><shape><trimesh file="missing.mesh.txt"/></shape><actorParam static="true"/></body>
            </node></nodes></scene></scenes>"#;
        let doc = parse_scenes(xml.as_bytes()).unwrap();
        assert!(validate(&doc).is_empty());
        let diags = validate_with_assets(&doc, std::path::Path::new("/nonexistent"));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "mesh-not-found");
    }

    const PLAIN: &str = r#"<scene formatVersion="1.0" name="level">
        <environment><clipping near="0.5" far="500"/></environment>
        <nodes>
          <node name="crate"><scale x="0.5" y="0.5" z="0.5"/><entity meshFile="crate.mesh"/></node>
          <node name="trigger"><scale x="2" y="1" z="1"/></node>
          <node name="ground"><entity meshFile="ground.mesh"/></node>
        </nodes></scene>"#;

    #[test]
    fn import_maps_logic_properties() {
        let props = parse_properties(
            "# level physics\ncrate.body = true\ncrate.shape = cube\ncrate.static = false\ncrate.mass = 10\ncrate.skin = 0.02\n\
             trigger.body = false\ntrigger.shape = sphere\ntrigger.static = true\n",
        )
        .unwrap();
        let out = import_dotscene(PLAIN.as_bytes(), &props).unwrap();
        assert!(out.diagnostics.is_empty());
        let scene = &out.document.scenes[0];
        let crate_body = scene.find_node("crate").unwrap().body.as_ref().unwrap();
        assert!(crate_body.has_graphics);
        assert_eq!(crate_body.shape.kind, ShapeKind::Cube { half_extents: DVec3::splat(0.5) });
        assert_eq!(crate_body.actor_params.mass, Some(10.0));
        assert_eq!(crate_body.actor_params.skin_width, 0.02);
        let trigger = scene.find_node("trigger").unwrap().body.as_ref().unwrap();
        assert!(!trigger.has_graphics);
        assert!(trigger.actor_params.is_static);
        assert_eq!(trigger.shape.kind, ShapeKind::Sphere { radius: 2.0 });
        assert!(scene.find_node("ground").unwrap().body.is_none());
        assert!(validate(&out.document).is_empty());
    }

    #[test]
    fn import_without_properties_is_graphics_only() {
        let out = import_dotscene(PLAIN.as_bytes(), &PropertyMap::new()).unwrap();
        assert!(out.document.scenes[0].walk().all(|n| n.body.is_none()));
    }

    #[test]
    fn import_mapping_errors() {
        let props = parse_properties("ground.shape = convex\nground.static = true\n").unwrap();
        match import_dotscene(PLAIN.as_bytes(), &props) {
            Err(FormatError::Mapping(d)) => {
                assert_eq!(d[0].code, "missing-file");
                assert!(d[0].message.contains("ground"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let props = parse_properties("ground.shape = cube\nground.static = true\nground.mass = 3\n").unwrap();
        let out = import_dotscene(PLAIN.as_bytes(), &props).unwrap();
        assert_eq!(out.diagnostics[0].code, "mass-ignored");
        assert_eq!(out.document.scenes[0].find_node("ground").unwrap().body.as_ref().unwrap().actor_params.mass, None);
    }

    #[test]
    fn plain_dotscene_rejects_physics_elements() {
        let xml = r#"<scene><nodes><node name="a"><body graphics="false"><shape><sphere radius="1"/></shape></body></node></nodes></scene>"#;
        let err = import_dotscene(xml.as_bytes(), &PropertyMap::new()).unwrap_err();
        assert_eq!(err.code(), Some("unknown-element"));
    }

    #[test]
    fn properties_parse_errors() {
        assert!(matches!(parse_properties("crate.weight = 3"), Err(FormatError::Properties { line: 1, .. })));
        assert!(matches!(parse_properties("crate.mass = heavy"), Err(FormatError::Properties { .. })));
        assert!(matches!(parse_properties("no equals sign"), Err(FormatError::Properties { .. })));
        let dotted = parse_properties("a.b.c.mass = 2").unwrap();
        assert_eq!(dotted["a.b.c"].mass, Some(2.0));
    }
}
