//! The three camera modes following one character.

use glam::DVec3;
use vekit::camera::{CameraMode, CameraParams, CameraRig};
use vekit::character::{CharacterDesc, ControllerRegistry};
use vekit::physics::{BodyDesc, CollisionShape, Pose};
use vekit::scene_graph::World;

const DT: f64 = 1.0 / 60.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::default();
    world.physics.add_body(BodyDesc::fixed(
        CollisionShape::cuboid(DVec3::new(30.0, 0.5, 30.0)),
        Pose::from_position(DVec3::new(0.0, -0.5, 0.0)),
    ))?;
    let mut registry = ControllerRegistry::create(&world)?;
    let hero = registry.add_character(&mut world, CharacterDesc::default(), DVec3::ZERO, 0.0, None)?;
    let mut rig = CameraRig::attach(&mut world, &registry, CameraMode::Chasing, hero, CameraParams::default())?;

    registry.set_velocity(hero, DVec3::new(1.0, 0.0, 1.0))?;
    for (frame, mode) in CameraMode::ALL.into_iter().cycle().take(6).enumerate() {
        rig.set_mode(mode);
        registry.set_yaw(hero, frame as f64 * 0.5)?;
        for _ in 0..30 {
            registry.simulate(&mut world, hero, DT)?;
            registry.render(&mut world, hero)?;
        }
        let pose = rig.update(&world, &registry)?;
        rig.apply(&mut world, &pose, &registry)?;
        let c = registry.get(hero)?;
        println!(
            "{mode:>12}: camera {:.2} looking {:.2}, {:.3} m from the character",
            pose.position,
            pose.forward(),
            pose.position.distance(c.position)
        );
    }
    Ok(())
}
