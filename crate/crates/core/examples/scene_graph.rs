//! Hierarchical transforms: a turret on a moving cart.

use std::f64::consts::FRAC_PI_2;

use glam::{DQuat, DVec3};
use vekit::scene_graph::{Transform, World};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut world = World::default();
    let cart = world.add_node("cart", Transform::from_position(DVec3::new(5.0, 0.0, 0.0)), None)?;
    let turret = world.add_node(
        "turret",
        Transform::new(DVec3::new(0.0, 1.0, 0.0), DQuat::from_rotation_y(FRAC_PI_2), DVec3::ONE),
        Some(cart),
    )?;
    let barrel = world.add_node("barrel", Transform::from_position(DVec3::new(0.0, 0.0, 2.0)), Some(turret))?;

    println!("barrel at {}", world.world_transform(barrel)?.position);

    world.set_local_transform(cart, Transform::new(DVec3::new(5.0, 0.0, 3.0), DQuat::IDENTITY, DVec3::splat(2.0)))?;
    println!("cart moved and scaled, barrel at {}", world.world_transform(barrel)?.position);

    if let Err(e) = world.reparent(cart, Some(barrel)) {
        println!("rejected: {e}");
    }

    world.reparent(barrel, None)?;
    println!("detached barrel keeps its local transform: {}", world.world_transform(barrel)?.position);
    println!("roots: {:?}", world.roots());
    Ok(())
}
