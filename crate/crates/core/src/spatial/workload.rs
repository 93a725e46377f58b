//! Seeded random boxes and frustums for benchmarks and oracle checks.

use glam::{DQuat, DVec3};
use rand::Rng;

use super::{Aabb, Frustum, ObjectId};

/// `n` boxes with centers uniform in `[0, extent)^3` and half extents in
/// `[0.1, 2)`, ids `0..n`.
pub fn random_boxes(rng: &mut impl Rng, n: usize, extent: f64) -> Vec<(ObjectId, Aabb)> {
    (0..n as ObjectId)
        .map(|id| {
            let c = DVec3::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent), rng.random_range(0.0..extent));
            let h = DVec3::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            (id, Aabb::from_center_half_extents(c, h))
        })
        .collect()
}

/// A frustum with its apex in `region` grown by 20% on every side, random
/// heading and pitch, and a far plane up to 1.5 region diagonals away.
pub fn random_frustum(rng: &mut impl Rng, region: &Aabb) -> Frustum {
    let size = region.extents().max(DVec3::splat(1.0));
    let lo = region.min - 0.2 * size;
    let hi = region.max + 0.2 * size;
    let eye = DVec3::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y), rng.random_range(lo.z..hi.z));
    let q = DQuat::from_euler(
        glam::EulerRot::YXZ,
        rng.random_range(-3.1..3.1),
        rng.random_range(-1.5..1.5),
        rng.random_range(-0.5..0.5),
    );
    let reach = 1.5 * size.length();
    let fov_y = rng.random_range(0.3..2.0);
    let aspect = rng.random_range(0.5..2.5);
    let far = rng.random_range(0.05 * reach..reach);
    Frustum::from_pose(eye, q, fov_y, aspect, 0.1, far.max(0.2))
}
