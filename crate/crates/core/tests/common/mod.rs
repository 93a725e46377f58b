#![allow(dead_code)]

use std::path::PathBuf;

use glam::{DQuat, DVec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vekit::scene_format::*;

pub fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

pub fn read_asset(name: &str) -> Vec<u8> {
    std::fs::read(asset(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Hand-written scene files that must parse and round-trip.
pub const HAND_WRITTEN: [&str; 6] = [
    "demo.scene",
    "level.exscene",
    "corpus/two_scenes.scene",
    "corpus/actors.scene",
    "corpus/lights.scene",
    "corpus/nested.scene",
];

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

fn vec3(rng: &mut ChaCha8Rng, scale: f64) -> DVec3 {
    DVec3::new(unit(rng), unit(rng), unit(rng)) * scale
}

fn positive(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn quat(rng: &mut ChaCha8Rng) -> DQuat {
    loop {
        let q = DQuat::from_xyzw(unit(rng), unit(rng), unit(rng), unit(rng));
        if q.length() > 0.1 {
            return q.normalize();
        }
    }
}

fn shape(rng: &mut ChaCha8Rng, is_static: bool) -> ShapeDef {
    let kind = match rng.random_range(0..if is_static { 5 } else { 4 }) {
        0 => ShapeKind::Cube { half_extents: DVec3::new(positive(rng, 0.05, 3.0), positive(rng, 0.05, 3.0), positive(rng, 0.05, 3.0)) },
        1 => ShapeKind::Sphere { radius: positive(rng, 0.05, 2.0) },
        2 => ShapeKind::Capsule { radius: positive(rng, 0.05, 1.0), height: positive(rng, 0.05, 2.0) },
        3 => ShapeKind::ConvexMesh { file: "crate.mesh".into() },
        _ => ShapeKind::TriangleMesh { file: "floor.mesh".into() },
    };
    let mut def = ShapeDef::new(kind);
    for i in 0..rng.random_range(0..3) {
        def.params.push((format!("p{i}"), format!("v{}", rng.random_range(0..100))));
    }
    def
}

fn node(rng: &mut ChaCha8Rng, names: &mut Vec<String>, depth: usize) -> NodeDef {
    let name = format!("n{}", names.len());
    names.push(name.clone());
    let mut n = NodeDef::new(name);
    n.position = vec3(rng, 50.0);
    n.orientation = quat(rng);
    n.scale = DVec3::new(positive(rng, 0.1, 3.0), positive(rng, 0.1, 3.0), positive(rng, 0.1, 3.0));
    if rng.random_bool(0.6) {
        n.entity = Some(EntityDef {
            mesh_file: format!("mesh{}.mesh", rng.random_range(0..5)),
            material: rng.random_bool(0.5).then(|| "stone".to_string()),
            cast_shadows: rng.random_bool(0.5),
        });
    }
    if rng.random_bool(0.15) {
        let kind = [LightKind::Point, LightKind::Directional, LightKind::Spot][rng.random_range(0..3)];
        n.light = Some(LightDef {
            kind,
            diffuse: [positive(rng, 0.0, 1.0), positive(rng, 0.0, 1.0), positive(rng, 0.0, 1.0)],
            direction: (kind != LightKind::Point).then(|| vec3(rng, 1.0).try_normalize().unwrap_or(DVec3::NEG_Y)),
            brightness: positive(rng, 0.1, 2.0),
            range: (kind != LightKind::Directional).then(|| positive(rng, 1.0, 50.0)),
            spot_angles: (kind == LightKind::Spot).then_some((0.2, 0.6)),
        });
    }
    if rng.random_bool(0.15) {
        n.sounds.push(SoundDef {
            file: "hum.ogg".into(),
            positional: rng.random_bool(0.5),
            looping: rng.random_bool(0.5),
            gain: positive(rng, 0.0, 1.0),
        });
    }
    if rng.random_bool(0.5) {
        let is_static = rng.random_bool(0.4);
        let has_graphics = n.entity.is_some() && rng.random_bool(0.7);
        n.body = Some(BodyDef {
            has_graphics,
            shape: shape(rng, is_static),
            actor_params: ActorParams {
                is_static,
                mass: (!is_static).then(|| positive(rng, 0.1, 200.0)),
                skin_width: positive(rng, 0.0, 0.1),
                group: rng.random_range(0..32),
            },
        });
    }
    if depth < 3 {
        for _ in 0..rng.random_range(0..3) {
            let child = node(rng, names, depth + 1);
            n.children.push(child);
        }
    }
    n
}

/// A valid document built from `seed`: one or two scenes, nested nodes and
/// every attachment kind.
pub fn random_document(seed: u64) -> SceneDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::new();
    for s in 0..rng.random_range(1..3) {
        let mut scene = SceneDef::new(format!("scene{s}"));
        scene.attributes.environment = if rng.random_bool(0.5) { Environment::Indoor } else { Environment::Outdoor };
        scene.attributes.shading = [Shading::Flat, Shading::Gouraud, Shading::Phong][rng.random_range(0..3)];
        scene.attributes.clip_near = positive(&mut rng, 0.01, 1.0);
        scene.attributes.clip_far = scene.attributes.clip_near + positive(&mut rng, 10.0, 1000.0);
        scene.attributes.ambient = [positive(&mut rng, 0.0, 1.0), positive(&mut rng, 0.0, 1.0), positive(&mut rng, 0.0, 1.0)];
        scene.attributes.gravity = vec3(&mut rng, 12.0);
        let mut names = Vec::new();
        for _ in 0..rng.random_range(1..5) {
            let n = node(&mut rng, &mut names, 0);
            scene.root_nodes.push(n);
        }
        if names.len() >= 2 && rng.random_bool(0.5) {
            let target = names[rng.random_range(1..names.len())].clone();
            let source = names[0].clone();
            scene.root_nodes[0].camera =
                Some(CameraAnchorDef { source_node: source, target_node: target, fov_y: positive(&mut rng, 0.2, 2.5), aspect: positive(&mut rng, 0.5, 3.0) });
        }
        scenes.push(scene);
    }
    SceneDocument { format_version: FORMAT_VERSION.to_string(), scenes }
}

/// Texts of `doc` with one body's shape cardinality broken in each way:
/// no shape variant, two variants, two `<shape>` elements, no `<shape>`.
pub fn cardinality_violations(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(i) = text[from..].find("<shape>") {
        let start = from + i;
        let end = start + text[start..].find("</shape>").unwrap() + "</shape>".len();
        let inner = &text[start + "<shape>".len()..end - "</shape>".len()];
        let variant_end = inner.find("/>").unwrap() + 2;
        let variant = inner[..variant_end].trim();
        let rest = &inner[variant_end..];
        let splice = |replacement: &str| format!("{}{}{}", &text[..start], replacement, &text[end..]);
        out.push(splice(&format!("<shape>{rest}</shape>")));
        out.push(splice(&format!("<shape>{variant}{variant}{rest}</shape>")));
        out.push(splice(&format!("<shape><sphere radius=\"1\"/></shape><shape>{inner}</shape>")));
        out.push(splice(""));
        from = end;
    }
    out
}

pub mod course {
    use glam::{DQuat, DVec3};
    use vekit::character::{CharacterDesc, ControllerRegistry};
    use vekit::physics::{BodyDesc, CollisionShape, Pose, SweepQuery, ALL_GROUPS};
    use vekit::scene_graph::World;

    pub const DT: f64 = 1.0 / 60.0;

    pub fn floor_world() -> World {
        let mut w = World::default();
        w.physics
            .add_body(BodyDesc::fixed(CollisionShape::cuboid(DVec3::new(50.0, 0.5, 50.0)), Pose::from_position(DVec3::new(0.0, -0.5, 0.0))))
            .unwrap();
        w
    }

    pub fn add_box(w: &mut World, center: DVec3, half: DVec3) {
        w.physics.add_body(BodyDesc::fixed(CollisionShape::cuboid(half), Pose::from_position(center))).unwrap();
    }

    /// Flat floor with a ledge of height `h` whose face is at `x = 1`.
    pub fn step_world(h: f64) -> World {
        let mut w = floor_world();
        add_box(&mut w, DVec3::new(2.5, h / 2.0, 0.0), DVec3::new(1.5, h / 2.0, 3.0));
        w
    }

    /// Flat floor with a ramp of `degrees` rising along +x from `x = 1`.
    pub fn ramp_world(degrees: f64) -> World {
        let mut w = floor_world();
        let half = DVec3::new(4.0, 0.2, 3.0);
        let q = DQuat::from_rotation_z(degrees.to_radians());
        let center = DVec3::new(1.0, 0.0, 0.0) + q * DVec3::new(half.x, 0.0, 0.0) - q * DVec3::Y * half.y;
        w.physics.add_body(BodyDesc::fixed(CollisionShape::cuboid(half), Pose::new(center, q))).unwrap();
        w
    }

    /// Foot position after walking +x at 2 m/s for 1.5 s toward a ledge of
    /// height `h`.
    pub fn walk_into_step(h: f64) -> DVec3 {
        let mut w = step_world(h);
        let mut reg = ControllerRegistry::create(&w).unwrap();
        let id = reg.add_character(&mut w, CharacterDesc::default(), DVec3::ZERO, 0.0, None).unwrap();
        reg.simulate(&mut w, id, DT).unwrap();
        reg.set_velocity(id, DVec3::new(2.0, 0.0, 0.0)).unwrap();
        for _ in 0..90 {
            reg.simulate(&mut w, id, DT).unwrap();
        }
        reg.get(id).unwrap().position
    }

    pub fn climbed(foot: DVec3, h: f64) -> bool {
        foot.x > 1.2 && foot.y >= h - 1e-3
    }

    /// Geometric step test independent of the controller: lift the standing
    /// capsule by the step offset, sweep it across the ledge, then drop it.
    /// The ledge is climbable when the lifted sweep is unobstructed and the
    /// drop lands on top.
    pub fn sweep_and_drop(h: f64) -> bool {
        let desc = CharacterDesc::default();
        let w = step_world(h);
        let shape = CollisionShape::capsule(desc.capsule_radius, desc.capsule_height / 2.0);
        let center = DVec3::new(0.0, desc.skin + desc.capsule_radius + desc.capsule_height / 2.0, 0.0);
        let sweep = |from: DVec3, d: DVec3| {
            let q = SweepQuery { shape: &shape, pose: Pose::from_position(from), displacement: d, group_mask: ALL_GROUPS, exclude: &[], skin: desc.skin };
            w.physics.sweep(&q).unwrap().map_or(1.0, |hit| hit.t)
        };
        let up = DVec3::new(0.0, desc.step_offset, 0.0);
        if sweep(center, up) < 1.0 {
            return false;
        }
        let across = DVec3::new(2.0, 0.0, 0.0);
        if sweep(center + up, across) < 1.0 {
            return false;
        }
        let down = DVec3::new(0.0, -(desc.step_offset + 1.0), 0.0);
        let t = sweep(center + up + across, down);
        let foot_y = center.y + up.y + down.y * t - (desc.capsule_radius + desc.capsule_height / 2.0);
        foot_y >= h - 1e-3
    }
}
