use std::path::PathBuf;

use super::*;

fn asset(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(name).to_string_lossy().into_owned()
}

fn call(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["vekit"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn validate_exit_codes() {
    let (code, out, _) = call(&["validate", &asset("demo.scene")]);
    assert_eq!((code, out.as_str()), (EXIT_OK, ""));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scene");
    std::fs::write(
        &bad,
        r#"<scenes formatVersion="1.1"><scene name="s"><nodes><node name="c"><camera source="c" target="ghost" fovY="1" aspect="1"/></node></nodes></scene></scenes>"#,
    )
    .unwrap();
    let (code, out, _) = call(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("ERROR "), "{out}");

    let (code, _, err) = call(&["validate", dir.path().join("missing.scene").to_str().unwrap()]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("cannot read"));

    std::fs::write(&bad, "<scenes").unwrap();
    assert_eq!(call(&["validate", bad.to_str().unwrap()]).0, EXIT_DIAGNOSTICS);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["cullbench", "--random", "10", "--index", "kdtree", "--trials", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["cullbench", "--index", "bvh", "--trials", "1"]).0, EXIT_USAGE);
    let scene = asset("demo.scene");
    let script = asset("walk.script");
    assert_eq!(call(&["simulate", &scene, "--script", &script, "--frames", "1", "--dt", "0"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn inspect_lists_nodes() {
    let (code, out, _) = call(&["inspect", &asset("demo.scene")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("scene demo: 7 nodes, 4 bodies, 0 actors, 1 characters"), "{out}");
    assert!(out.contains("#4 player at 0 0.925 0 entity=crate.mesh character"));
    assert_eq!(call(&["inspect", &asset("demo.scene"), "--scene", "nope"]).0, EXIT_USAGE);
}

#[test]
fn convert_matches_golden_and_reports_mapping_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("level.exscene");
    let (code, out, _) =
        call(&["convert", &asset("level.dotscene"), &asset("level.properties"), "-o", out_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert_eq!(std::fs::read(&out_path).unwrap(), std::fs::read(asset("level.exscene")).unwrap());

    let props = dir.path().join("bad.properties");
    std::fs::write(&props, "barrel_1.shape = convex\nbarrel_1.mass = 3\n").unwrap();
    let (code, out, _) =
        call(&["convert", &asset("level.dotscene"), props.to_str().unwrap(), "-o", out_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(out.contains("barrel_1") && out.contains("missing-file"), "{out}");

    std::fs::write(&props, "").unwrap();
    let (code, _, _) =
        call(&["convert", &asset("level.dotscene"), props.to_str().unwrap(), "-o", out_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let doc = parse_scenes(&std::fs::read(&out_path).unwrap()).unwrap();
    assert!(doc.scenes[0].walk().all(|n| n.body.is_none()));
}

#[test]
fn simulate_prints_digest_and_warns_on_unbound_keys() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("s.script");
    std::fs::write(&script, "0 keyboard press Q\n1 keyboard release Q\n").unwrap();
    let trace = dir.path().join("out.trace");
    let (code, out, _) = call(&[
        "simulate",
        &asset("demo.scene"),
        "--script",
        script.to_str().unwrap(),
        "--frames",
        "0",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&trace).unwrap();
    let digest = out.lines().last().unwrap();
    assert_eq!(text, format!("vetrace 1\n{digest}\n"));

    let (code, out, _) =
        call(&["simulate", &asset("demo.scene"), "--script", script.to_str().unwrap(), "--frames", "3"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("WARNING frame 0") && lines[1].starts_with("WARNING frame 1"));
    assert!(lines[2].starts_with("DIGEST "));

    std::fs::write(&script, "zero keyboard press W\n").unwrap();
    let (code, _, _) = call(&["simulate", &asset("demo.scene"), "--script", script.to_str().unwrap(), "--frames", "3"]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
}

#[test]
fn cullbench_agrees_with_brute_force() {
    let (code, out, err) = call(&["cullbench", "--random", "300", "--index", "octree", "--trials", "20", "--seed", "4"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.ends_with("agreement 20/20\n"), "{out}");
    assert!(err.contains("trials in"));

    let (code, out, _) = call(&["cullbench", "--scene", &asset("demo.scene"), "--index", "bsp", "--trials", "5"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.ends_with("agreement 5/5\n"));
}

#[test]
fn bsp_and_octree_see_the_same_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let objects = random_boxes(&mut rng, 500, 100.0);
    let a = cull_trials(IndexKind::Bsp, &objects, 30, 1).unwrap();
    let b = cull_trials(IndexKind::Octree, &objects, 30, 1).unwrap();
    assert!(a.iter().chain(&b).all(|t| t.agrees));
    assert!(a.iter().zip(&b).all(|(x, y)| x.visible == y.visible));
    assert!(a.iter().zip(&b).any(|(x, y)| x.nodes_visited != y.nodes_visited));
}

#[test]
fn empty_scene_culls_nothing() {
    let trials = cull_trials(IndexKind::Bvh, &[], 10, 0).unwrap();
    assert!(trials.iter().all(|t| t.visible == 0 && t.agrees));
}
