//! Crates dropped onto a floor, a bouncing ball and a collision group that
//! is switched off.

use glam::DVec3;
use vekit::physics::*;

const DT: f64 = 1.0 / 60.0;

fn main() -> Result<(), PhysicsError> {
    let mut world = PhysicsWorld::new(DVec3::new(0.0, -9.81, 0.0));
    world.add_body(BodyDesc::fixed(CollisionShape::cuboid(DVec3::new(20.0, 0.5, 20.0)), Pose::from_position(DVec3::new(0.0, -0.5, 0.0))))?;

    let crates: Vec<BodyId> = (0..3)
        .map(|i| {
            let at = Pose::from_position(DVec3::new(0.0, 0.5 + 1.2 * i as f64, 0.0));
            world.add_body(BodyDesc::dynamic(CollisionShape::cuboid(DVec3::splat(0.4)), at, 20.0).with_group(1))
        })
        .collect::<Result<_, _>>()?;

    let bouncy = Material { friction: 0.2, restitution: 0.8 };
    let ball = world.add_body(BodyDesc::dynamic(CollisionShape::sphere(0.3), Pose::from_position(DVec3::new(3.0, 4.0, 0.0)), 1.0).with_material(bouncy))?;

    let ghost = world.add_body(BodyDesc::dynamic(CollisionShape::sphere(0.3), Pose::from_position(DVec3::new(-3.0, 1.0, 0.0)), 1.0).with_group(7))?;
    world.set_group_interaction(0, 7, false)?;

    let mut hits = 0;
    for frame in 0..240 {
        hits += world.step(DT)?.len();
        if frame % 60 == 59 {
            let y = |id| world.body(id).unwrap().pose.position.y;
            println!(
                "t={:.0}s crates at {:.3} {:.3} {:.3}, ball {:.3}, ghost {:.1}",
                (frame + 1) as f64 * DT,
                y(crates[0]),
                y(crates[1]),
                y(crates[2]),
                y(ball),
                y(ghost)
            );
        }
    }
    println!("{hits} hit reports");

    let cap = CollisionShape::capsule(0.4, 0.5);
    let sweep = SweepQuery {
        shape: &cap,
        pose: Pose::from_position(DVec3::new(-6.0, 0.95, 0.0)),
        displacement: DVec3::new(12.0, 0.0, 0.0),
        group_mask: ALL_GROUPS,
        exclude: &[],
        skin: 0.01,
    };
    if let Some(hit) = world.sweep(&sweep)? {
        println!("capsule sweep stops at t={:.3} against body {} (normal {:.2})", hit.t, hit.other, hit.normal);
    }
    Ok(())
}
