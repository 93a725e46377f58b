//! A capsule character walking over a low step, into a wall and against a
//! crate it pushes.

use glam::DVec3;
use vekit::character::{CharacterDesc, ControllerRegistry};
use vekit::physics::{BodyDesc, CollisionShape, Pose};
use vekit::scene_graph::World;

const DT: f64 = 1.0 / 60.0;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::default();
    let fixed = |half: DVec3, at: DVec3| BodyDesc::fixed(CollisionShape::cuboid(half), Pose::from_position(at));
    world.physics.add_body(fixed(DVec3::new(30.0, 0.5, 30.0), DVec3::new(0.0, -0.5, 0.0)))?;
    world.physics.add_body(fixed(DVec3::new(1.0, 0.1, 3.0), DVec3::new(3.0, 0.1, 0.0)))?;
    world.physics.add_body(fixed(DVec3::new(0.5, 2.0, 3.0), DVec3::new(8.0, 2.0, 0.0)))?;
    let crate_body = world.physics.add_body(
        BodyDesc::dynamic(CollisionShape::cuboid(DVec3::splat(0.4)), Pose::from_position(DVec3::new(5.0, 0.4, 2.0)), 15.0).with_group(2),
    )?;

    let mut registry = ControllerRegistry::create(&world)?;
    let desc = CharacterDesc { push_strength: 0.05, ..CharacterDesc::default() };
    let hero = registry.add_character(&mut world, desc, DVec3::ZERO, 0.0, None)?;
    registry.subscribe(1 << 2, |hit| println!("  pushed body {} with {:.2}", hit.other, hit.applied_impulse));

    registry.set_velocity(hero, DVec3::new(2.0, 0.0, 0.0))?;
    for frame in 0..240 {
        world.physics.step(DT)?;
        registry.simulate(&mut world, hero, DT)?;
        registry.render(&mut world, hero)?;
        if frame % 40 == 39 {
            let c = registry.get(hero)?;
            println!("frame {frame}: foot {:.3} grounded {}", c.position, c.grounded);
        }
    }

    registry.set_velocity(hero, DVec3::new(-2.0, 0.0, 2.0))?;
    let mut pushed = 0;
    for _ in 0..90 {
        world.physics.step(DT)?;
        pushed += registry.simulate(&mut world, hero, DT)?.iter().filter(|h| h.other == crate_body).count();
    }
    println!("{pushed} frames in contact with the crate, now at {:.3}", world.physics.body(crate_body).unwrap().pose.position);

    let crouched = registry.resize_volume(&mut world, hero, 0.5)?;
    println!("crouched: {crouched}, height {}", registry.get(hero)?.current_height);
    Ok(())
}
