use glam::{DQuat, DVec3};

use super::Aabb;
use crate::math;

/// Plane `normal · p + offset = 0`; the positive side is "inside".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: DVec3,
    pub offset: f64,
}

impl Plane {
    pub fn through(normal: DVec3, point: DVec3) -> Plane {
        Plane { normal, offset: -normal.dot(point) }
    }

    pub fn signed_distance(&self, p: DVec3) -> f64 {
        self.normal.dot(p) + self.offset
    }

    /// True iff the whole box lies strictly behind the plane (p-vertex test).
    pub fn box_behind(&self, b: &Aabb) -> bool {
        let n = self.normal;
        let p = DVec3::new(
            if n.x >= 0.0 { b.max.x } else { b.min.x },
            if n.y >= 0.0 { b.max.y } else { b.min.y },
            if n.z >= 0.0 { b.max.z } else { b.min.z },
        );
        self.signed_distance(p) < 0.0
    }
}

/// Six inward-facing planes: near, far, left, right, top, bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Frustum {
    pub planes: [Plane; 6],
}

impl Frustum {
    /// Build from a camera pose. The camera looks along its local +Z axis with
    /// +Y up.
    pub fn from_pose(position: DVec3, orientation: DQuat, fov_y: f64, aspect: f64, near: f64, far: f64) -> Frustum {
        assert!(near > 0.0 && far > near, "frustum needs 0 < near < far");
        let f = orientation * math::FORWARD;
        let up = orientation * DVec3::Y;
        let side = orientation * DVec3::X;
        let half_y = 0.5 * fov_y;
        let half_x = libm::atan(libm::tan(half_y) * aspect);
        let (sy, cy) = (libm::sin(half_y), libm::cos(half_y));
        let (sx, cx) = (libm::sin(half_x), libm::cos(half_x));
        let planes = [
            Plane::through(f, position + f * near),
            Plane::through(-f, position + f * far),
            Plane::through((f * sx + side * cx).normalize(), position),
            Plane::through((f * sx - side * cx).normalize(), position),
            Plane::through((f * sy - up * cy).normalize(), position),
            Plane::through((f * sy + up * cy).normalize(), position),
        ];
        Frustum { planes }
    }

    /// Conservative test shared by every index and by the brute-force scan:
    /// a box is rejected only if it is entirely behind one of the planes.
    pub fn intersects_aabb(&self, b: &Aabb) -> bool {
        !self.planes.iter().any(|p| p.box_behind(b))
    }

    pub fn contains_point(&self, p: DVec3) -> bool {
        self.planes.iter().all(|pl| pl.signed_distance(p) >= 0.0)
    }
}
