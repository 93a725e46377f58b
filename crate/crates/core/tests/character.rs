mod common;

use common::course::*;
use glam::{DQuat, DVec3};
use proptest::prelude::*;
use vekit::character::{CharacterDesc, ControllerRegistry};
use vekit::physics::{BodyDesc, CollisionShape, Pose};

fn wall_distance(yaw: f64, wall_x: f64) -> f64 {
    let mut w = floor_world();
    add_box(&mut w, DVec3::new(wall_x + 0.5, 2.0, 0.0), DVec3::new(0.5, 2.0, 3.0));
    let mut reg = ControllerRegistry::create(&w).unwrap();
    let id = reg.add_character(&mut w, CharacterDesc::default(), DVec3::ZERO, yaw, None).unwrap();
    reg.set_velocity(id, DVec3::new(2.0, 0.0, 0.0)).unwrap();
    for _ in 0..120 {
        reg.simulate(&mut w, id, DT).unwrap();
    }
    wall_x - reg.get(id).unwrap().position.x
}

#[test]
fn step_heights_match_the_sweep_and_drop_oracle() {
    for h in [0.1, 0.2, 0.29, 0.35, 0.5] {
        let oracle = sweep_and_drop(h);
        assert_eq!(oracle, h < 0.3, "oracle at {h}");
        let foot = walk_into_step(h);
        assert_eq!(climbed(foot, h), oracle, "h {h}: foot {foot}");
    }
}

#[test]
fn auto_step_is_monotone_in_height() {
    let results: Vec<(f64, bool)> = (1..=25).map(|i| i as f64 * 0.02).map(|h| (h, climbed(walk_into_step(h), h))).collect();
    for pair in results.windows(2) {
        assert!(pair[0].1 || !pair[1].1, "climbed {} but not {}", pair[1].0, pair[0].0);
    }
    assert!(results[0].1 && !results[24].1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wall_distance_ignores_yaw(yaw in -10.0f64..10.0, wall_x in 1.0f64..3.0) {
        let reference = wall_distance(0.0, wall_x);
        prop_assert!((wall_distance(yaw, wall_x) - reference).abs() <= 1e-9);
    }

    #[test]
    fn steep_slopes_are_never_climbed(degrees in 46.0f64..75.0, speed in 0.5f64..4.0) {
        let mut w = ramp_world(degrees);
        let mut reg = ControllerRegistry::create(&w).unwrap();
        let id = reg.add_character(&mut w, CharacterDesc::default(), DVec3::new(-0.5, 0.0, 0.0), 0.0, None).unwrap();
        reg.simulate(&mut w, id, DT).unwrap();
        reg.set_velocity(id, DVec3::new(speed, 0.0, 0.0)).unwrap();
        let mut heights = vec![reg.get(id).unwrap().position.y];
        for _ in 0..900 {
            reg.simulate(&mut w, id, DT).unwrap();
            heights.push(reg.get(id).unwrap().position.y);
        }
        for (i, &start) in heights.iter().enumerate() {
            let peak = heights[i..(i + 600).min(heights.len())].iter().copied().fold(f64::MIN, f64::max);
            prop_assert!(peak - start <= 1e-3, "gained {} from frame {}", peak - start, i);
        }
    }

    #[test]
    fn no_tunneling_through_obstacles(
        boxes in proptest::collection::vec(((-4.0f64..4.0, -4.0f64..4.0), (0.1f64..1.0, 0.05f64..1.5, 0.1f64..1.0), -1.0f64..1.0), 1..8),
        moves in proptest::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 1..6),
    ) {
        let mut w = floor_world();
        for ((x, z), (hx, hy, hz), turn) in &boxes {
            let pose = Pose::new(DVec3::new(*x, *hy, *z), DQuat::from_rotation_y(*turn));
            w.physics.add_body(BodyDesc::fixed(CollisionShape::cuboid(DVec3::new(*hx, *hy, *hz)), pose)).unwrap();
        }
        let mut reg = ControllerRegistry::create(&w).unwrap();
        let spawned = reg.add_character(&mut w, CharacterDesc::default(), DVec3::new(0.0, 0.0, 6.0), 0.0, None);
        prop_assume!(spawned.is_ok());
        let id = spawned.unwrap();
        for (vx, vz) in moves {
            reg.set_velocity(id, DVec3::new(vx, 0.0, vz)).unwrap();
            for _ in 0..40 {
                reg.simulate(&mut w, id, DT).unwrap();
                let c = reg.get(id).unwrap();
                let mask = w.physics.interaction_mask(c.desc.group);
                let near = w.physics.query_proximity(&c.shape(), &Pose::from_position(c.center()), mask, &[c.body], 0.0).unwrap();
                for (other, p) in near {
                    prop_assert!(-p.distance <= c.desc.skin + 0.005, "{} deep in body {}", -p.distance, other);
                }
            }
        }
    }

    #[test]
    fn simulate_ignores_node_transforms_and_render_touches_no_physics(
        nudges in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 30),
    ) {
        let mut a = step_world(0.2);
        let mut b = step_world(0.2);
        let mut ra = ControllerRegistry::create(&a).unwrap();
        let mut rb = ControllerRegistry::create(&b).unwrap();
        let ia = ra.add_character(&mut a, CharacterDesc::default(), DVec3::ZERO, 0.3, None).unwrap();
        let ib = rb.add_character(&mut b, CharacterDesc::default(), DVec3::ZERO, 0.3, None).unwrap();
        ra.set_velocity(ia, DVec3::new(2.0, 0.0, 0.5)).unwrap();
        rb.set_velocity(ib, DVec3::new(2.0, 0.0, 0.5)).unwrap();
        for (x, y, z) in nudges {
            let node = rb.get(ib).unwrap().linked_node;
            b.set_world_pose(node, DVec3::new(x, y, z), DQuat::from_rotation_x(x)).unwrap();
            ra.simulate(&mut a, ia, DT).unwrap();
            rb.simulate(&mut b, ib, DT).unwrap();
            prop_assert_eq!(ra.get(ia).unwrap(), rb.get(ib).unwrap());

            let bodies: Vec<_> = a.physics.bodies().map(|b| (b.pose, b.pose_generation(), b.linear_velocity)).collect();
            let state = ra.get(ia).unwrap().clone();
            ra.render(&mut a, ia).unwrap();
            let after: Vec<_> = a.physics.bodies().map(|b| (b.pose, b.pose_generation(), b.linear_velocity)).collect();
            prop_assert_eq!(bodies, after);
            prop_assert_eq!(&state, ra.get(ia).unwrap());
        }
    }
}

#[test]
fn one_registry_per_world() {
    let first = floor_world();
    let second = floor_world();
    let r1 = ControllerRegistry::create(&first).unwrap();
    for _ in 0..3 {
        assert!(ControllerRegistry::create(&first).is_err());
    }
    let mut w2 = second;
    let mut r2 = ControllerRegistry::create(&w2).unwrap();
    r2.add_character(&mut w2, CharacterDesc::default(), DVec3::ZERO, 0.0, None).unwrap();
    assert_eq!(r1.characters().len(), 0);
    assert_eq!(r2.characters().len(), 1);
}
