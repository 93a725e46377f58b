//! Shared conventions: right-handed, +Y up, cameras look along local +Z.
//!
//! Simulation code uses `libm` for trigonometry so results do not depend on
//! the platform math library.

use glam::{DMat3, DQuat, DVec3};

/// Local forward axis for cameras, characters and frustums.
pub const FORWARD: DVec3 = DVec3::Z;

/// Rotation by `yaw` radians about +Y.
pub fn yaw_quat(yaw: f64) -> DQuat {
    let h = 0.5 * yaw;
    DQuat::from_xyzw(0.0, libm::sin(h), 0.0, libm::cos(h))
}

/// Horizontal forward direction after turning by `yaw`. At yaw 0 this is +Z,
/// at +π/2 it is +X.
pub fn yaw_forward(yaw: f64) -> DVec3 {
    DVec3::new(libm::sin(yaw), 0.0, libm::cos(yaw))
}

/// Rotate `v` by `yaw` about +Y.
pub fn rotate_yaw(v: DVec3, yaw: f64) -> DVec3 {
    let (s, c) = (libm::sin(yaw), libm::cos(yaw));
    DVec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
}

/// Heading of `q * FORWARD` projected onto the horizontal plane, the
/// inverse of [`yaw_quat`] for pure yaw rotations.
pub fn yaw_of(q: DQuat) -> f64 {
    let f = q * FORWARD;
    libm::atan2(f.x, f.z)
}

/// Orientation mapping local +Z onto `target - eye` and local +Y as close to
/// `up` as possible. `None` when the direction is degenerate or parallel to
/// `up`.
pub fn look_at(eye: DVec3, target: DVec3, up: DVec3) -> Option<DQuat> {
    let forward = (target - eye).try_normalize()?;
    let side = up.cross(forward).try_normalize()?;
    let true_up = forward.cross(side);
    let q = DQuat::from_mat3(&DMat3::from_cols(side, true_up, forward)).normalize();
    q.is_finite().then_some(q)
}

pub fn is_unit(q: DQuat, tolerance: f64) -> bool {
    (q.length() - 1.0).abs() <= tolerance
}
