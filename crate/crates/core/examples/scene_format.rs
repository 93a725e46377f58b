//! Parse, validate and re-serialize a scene, then convert a DotScene file
//! with its physics sidecar.
//!
//! ```text
//! cargo run --example scene_format
//! ```

use std::path::Path;

use vekit::scene_format::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let assets = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets");

    let doc = parse_scenes(&std::fs::read(assets.join("demo.scene"))?)?;
    for scene in &doc.scenes {
        let bodies = scene.walk().filter(|n| n.body.is_some()).count();
        println!("scene {}: {} nodes, {bodies} bodies", scene.name, scene.walk().count());
    }
    for d in validate_with_assets(&doc, &assets) {
        println!("  {d}");
    }

    let bytes = serialize_scenes(&doc)?;
    assert_eq!(parse_scenes(&bytes)?, doc);
    println!("round trip ok ({} bytes)", bytes.len());

    // Malformed bodies are rejected, never repaired.
    let two_shapes = r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="a">
        <body graphics="false"><shape><sphere radius="1"/><cube hx="1" hy="1" hz="1"/></shape><actorParams static="true"/></body>
        </node></nodes></scene></scenes>"#;
    println!("two shape variants: {}", parse_scenes(two_shapes.as_bytes()).unwrap_err());

    let props = parse_properties(&std::fs::read_to_string(assets.join("level.properties"))?)?;
    let outcome = import_dotscene(&std::fs::read(assets.join("level.dotscene"))?, &props)?;
    for d in &outcome.diagnostics {
        println!("  {d}");
    }
    let converted = serialize_scenes(&outcome.document)?;
    println!(
        "converted level: {} bodies, matches golden: {}",
        outcome.document.scenes[0].walk().filter(|n| n.body.is_some()).count(),
        converted == std::fs::read(assets.join("level.exscene"))?
    );
    Ok(())
}
