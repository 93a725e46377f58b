mod common;

use std::sync::{Arc, Mutex};

use common::course::*;
use glam::DVec3;
use proptest::prelude::*;
use vekit::camera::{CameraMode, CameraParams, CameraRig};
use vekit::character::{CharacterDesc, ControllerRegistry};
use vekit::runtime::{hash_state, parse_script, FrameContext, FrameListener, SimConfig, Simulation};
use vekit::scene_graph::World;

fn setup(mode: CameraMode, params: CameraParams) -> (World, ControllerRegistry, CameraRig) {
    let mut w = step_world(0.2);
    let mut reg = ControllerRegistry::create(&w).unwrap();
    reg.add_character(&mut w, CharacterDesc::default(), DVec3::new(-2.0, 0.0, 0.0), 0.0, None).unwrap();
    let rig = CameraRig::attach(&mut w, &reg, mode, 0, params).unwrap();
    (w, reg, rig)
}

fn motion() -> impl Strategy<Value = Vec<(f64, f64, f64, bool)>> {
    proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -4.0f64..4.0, proptest::bool::weighted(0.1)), 1..30)
}

/// Drives character 0 through `moves`, ten frames each, calling `check`
/// after every camera update and apply.
fn drive(
    w: &mut World,
    reg: &mut ControllerRegistry,
    rig: &mut CameraRig,
    moves: &[(f64, f64, f64, bool)],
    mut check: impl FnMut(&World, &ControllerRegistry, &CameraRig, &vekit::camera::CameraPose) -> Result<(), TestCaseError>,
) -> Result<(), TestCaseError> {
    for &(vx, vz, yaw, jump) in moves {
        reg.set_velocity(0, DVec3::new(vx, 0.0, vz)).unwrap();
        reg.set_yaw(0, yaw).unwrap();
        if jump {
            reg.jump(0, 4.0).unwrap();
        }
        for _ in 0..10 {
            reg.simulate(w, 0, DT).unwrap();
            reg.render(w, 0).unwrap();
            let pose = rig.update(w, reg).unwrap();
            rig.apply(w, &pose, reg).unwrap();
            check(w, reg, rig, &pose)?;
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chase_distance_is_constant(moves in motion(), offset in (-5.0f64..5.0, 0.5f64..5.0, -8.0f64..-1.0)) {
        let params = CameraParams { chase_offset: DVec3::new(offset.0, offset.1, offset.2), ..CameraParams::default() };
        let expected = params.chase_offset.length();
        let (mut w, mut reg, mut rig) = setup(CameraMode::Chasing, params);
        drive(&mut w, &mut reg, &mut rig, &moves, |w, reg, rig, pose| {
            let c = reg.get(0).unwrap();
            prop_assert!((pose.position.distance(c.position) - expected).abs() <= 1e-9);
            let node = w.world_transform(rig.camera_node()).unwrap();
            prop_assert!((node.position.distance(c.position) - expected).abs() <= 1e-9);
            Ok(())
        })?;
    }

    #[test]
    fn chasing_and_fixed_cameras_look_at_the_target(moves in motion(), fixed in proptest::bool::ANY) {
        let mode = if fixed { CameraMode::Fixed } else { CameraMode::Chasing };
        let (mut w, mut reg, mut rig) = setup(mode, CameraParams::default());
        drive(&mut w, &mut reg, &mut rig, &moves, |_, reg, rig, pose| {
            let target = rig.target_point(reg.get(0).unwrap());
            let to_target = target - pose.position;
            if to_target.length() > 1e-6 {
                prop_assert!(pose.forward().dot(to_target.normalize()) >= 1.0 - 1e-9);
            }
            Ok(())
        })?;
    }

    #[test]
    fn first_person_sits_on_the_character_node(moves in motion()) {
        let params = CameraParams { eye_offset: DVec3::ZERO, ..CameraParams::default() };
        let (mut w, mut reg, mut rig) = setup(CameraMode::FirstPerson, params);
        drive(&mut w, &mut reg, &mut rig, &moves, |w, reg, rig, pose| {
            let node = reg.get(0).unwrap().linked_node;
            prop_assert_eq!(rig.camera_node(), node);
            prop_assert_eq!(pose.position, w.world_transform(node).unwrap().position);
            Ok(())
        })?;
    }

    #[test]
    fn update_leaves_the_world_alone(moves in motion(), mode in 0usize..3) {
        let (mut w, mut reg, mut rig) = setup(CameraMode::ALL[mode], CameraParams::default());
        drive(&mut w, &mut reg, &mut rig, &moves, |_, _, _, _| Ok(()))?;
        let before = (hash_state(&w, Some(&reg), None), w.generation());
        let transforms: Vec<_> = w.nodes().map(|n| w.world_transform(n.id).unwrap()).collect();
        for _ in 0..3 {
            rig.update(&w, &reg).unwrap();
        }
        prop_assert_eq!(before, (hash_state(&w, Some(&reg), None), w.generation()));
        let after: Vec<_> = w.nodes().map(|n| w.world_transform(n.id).unwrap()).collect();
        prop_assert_eq!(transforms, after);
    }
}

struct ChaseProbe {
    node: vekit::scene_graph::NodeId,
    distances: Arc<Mutex<Vec<f64>>>,
}

impl FrameListener for ChaseProbe {
    fn frame_ended(&mut self, ctx: &mut FrameContext<'_>) {
        let camera = ctx.world.world_transform(self.node).unwrap().position;
        self.distances.lock().unwrap().push(camera.distance(ctx.registry.get(0).unwrap().position));
    }
}

#[test]
fn chase_distance_holds_over_the_demo_run() {
    let mut sim = Simulation::load(&common::asset("demo.scene")).unwrap();
    let rig = sim.rig.as_ref().unwrap();
    assert_eq!(rig.mode(), CameraMode::Chasing);
    let expected = rig.params().chase_offset.length();
    let distances = Arc::new(Mutex::new(Vec::new()));
    sim.register_listener(0, Box::new(ChaseProbe { node: rig.camera_node(), distances: distances.clone() }));
    let script = parse_script(&std::fs::read_to_string(common::asset("walk_push_crouch.script")).unwrap()).unwrap();
    sim.run(&script, &SimConfig::default()).unwrap();
    let distances = distances.lock().unwrap();
    assert_eq!(distances.len(), 600);
    assert!(distances.iter().all(|d| (d - expected).abs() <= 1e-9));
}
