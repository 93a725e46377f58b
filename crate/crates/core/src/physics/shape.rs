use std::sync::Arc;

use glam::{DMat3, DQuat, DVec3};

use crate::scene_format::TriangleMeshData;
use crate::spatial::{Aabb, Bvh, ObjectId, SpatialIndex};

use super::PhysicsError;

/// Position and orientation of a body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: DVec3,
    pub orientation: DQuat,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { position: DVec3::ZERO, orientation: DQuat::IDENTITY };

    pub fn new(position: DVec3, orientation: DQuat) -> Self {
        Pose { position, orientation }
    }

    pub fn from_position(position: DVec3) -> Self {
        Pose { position, orientation: DQuat::IDENTITY }
    }

    pub fn transform_point(&self, p: DVec3) -> DVec3 {
        self.position + self.orientation * p
    }

    pub fn inverse_transform_point(&self, p: DVec3) -> DVec3 {
        self.orientation.inverse() * (p - self.position)
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.orientation.is_finite()
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

/// Static triangle mesh with a triangle BVH for queries.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<DVec3>,
    triangles: Vec<[u32; 3]>,
    bvh: Bvh,
    bounds: Aabb,
}

impl TriMesh {
    pub fn new(vertices: Vec<DVec3>, triangles: Vec<[u32; 3]>) -> Result<Self, PhysicsError> {
        if triangles.is_empty() {
            return Err(PhysicsError::InvalidShape("triangle mesh has no triangles".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(PhysicsError::InvalidShape("triangle mesh has non-finite vertices".into()));
        }
        if triangles.iter().flatten().any(|&i| i as usize >= vertices.len()) {
            return Err(PhysicsError::InvalidShape("triangle index out of range".into()));
        }
        let boxes: Vec<(ObjectId, Aabb)> = triangles
            .iter()
            .enumerate()
            .map(|(i, t)| (i as ObjectId, Aabb::from_points(t.iter().map(|&k| vertices[k as usize])).unwrap()))
            .collect();
        let bvh = Bvh::build(&boxes).map_err(|e| PhysicsError::InvalidShape(e.to_string()))?;
        let bounds = Aabb::from_points(vertices.iter().copied()).unwrap();
        Ok(TriMesh { vertices, triangles, bvh, bounds })
    }

    /// Mesh with every vertex scaled component-wise.
    pub fn from_mesh_data(data: &TriangleMeshData, scale: DVec3) -> Result<Self, PhysicsError> {
        TriMesh::new(data.vertices.iter().map(|v| *v * scale).collect(), data.triangles.clone())
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [DVec3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0] as usize], self.vertices[t[1] as usize], self.vertices[t[2] as usize]]
    }

    pub fn local_bounds(&self) -> Aabb {
        self.bounds
    }

    /// Triangles whose bounds overlap a local-space box, ascending index.
    pub fn triangles_in(&self, region: &Aabb) -> Vec<usize> {
        self.bvh.query_aabb(region).into_iter().map(|i| i as usize).collect()
    }
}

/// Convex point cloud; collision uses its hull implicitly through support
/// mapping.
#[derive(Debug, Clone)]
pub struct ConvexHull {
    vertices: Vec<DVec3>,
}

impl ConvexHull {
    pub fn new(vertices: Vec<DVec3>) -> Result<Self, PhysicsError> {
        if vertices.len() < 4 || vertices.iter().any(|v| !v.is_finite()) {
            return Err(PhysicsError::InvalidShape("convex shape needs at least 4 finite vertices".into()));
        }
        let hull = ConvexHull { vertices };
        if hull.volume_probe() <= 1e-12 {
            return Err(PhysicsError::InvalidShape("convex vertices are coplanar".into()));
        }
        Ok(hull)
    }

    pub fn vertices(&self) -> &[DVec3] {
        &self.vertices
    }

    /// Largest tetrahedron volume spanned from the first vertex; zero iff all
    /// vertices are coplanar.
    fn volume_probe(&self) -> f64 {
        let v = &self.vertices;
        let a = v[0];
        let b = *v.iter().max_by(|p, q| p.distance_squared(a).total_cmp(&q.distance_squared(a))).unwrap();
        let ab = b - a;
        let c = *v.iter().max_by(|p, q| ab.cross(**p - a).length().total_cmp(&ab.cross(**q - a).length())).unwrap();
        let n = ab.cross(c - a);
        v.iter().map(|p| n.dot(*p - a).abs()).fold(0.0, f64::max) / 6.0
    }

    pub fn support(&self, dir: DVec3) -> DVec3 {
        let mut best = self.vertices[0];
        let mut best_d = best.dot(dir);
        for v in &self.vertices[1..] {
            let d = v.dot(dir);
            if d > best_d {
                best = *v;
                best_d = d;
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub enum CollisionShape {
    Sphere { radius: f64 },
    /// Capsule along local Y; `half_height` is half the cylinder segment.
    Capsule { radius: f64, half_height: f64 },
    Box { half_extents: DVec3 },
    Convex(Arc<ConvexHull>),
    TriMesh(Arc<TriMesh>),
}

impl CollisionShape {
    pub fn sphere(radius: f64) -> Self {
        CollisionShape::Sphere { radius }
    }

    pub fn capsule(radius: f64, half_height: f64) -> Self {
        CollisionShape::Capsule { radius, half_height }
    }

    pub fn cuboid(half_extents: DVec3) -> Self {
        CollisionShape::Box { half_extents }
    }

    pub fn convex(vertices: Vec<DVec3>) -> Result<Self, PhysicsError> {
        Ok(CollisionShape::Convex(Arc::new(ConvexHull::new(vertices)?)))
    }

    pub fn trimesh(mesh: TriMesh) -> Self {
        CollisionShape::TriMesh(Arc::new(mesh))
    }

    pub fn name(&self) -> &'static str {
        match self {
            CollisionShape::Sphere { .. } => "sphere",
            CollisionShape::Capsule { .. } => "capsule",
            CollisionShape::Box { .. } => "box",
            CollisionShape::Convex(_) => "convex",
            CollisionShape::TriMesh(_) => "trimesh",
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let good = match self {
            CollisionShape::Sphere { radius } => ok(*radius),
            CollisionShape::Capsule { radius, half_height } => ok(*radius) && ok(*half_height),
            CollisionShape::Box { half_extents } => ok(half_extents.x) && ok(half_extents.y) && ok(half_extents.z),
            CollisionShape::Convex(_) | CollisionShape::TriMesh(_) => true,
        };
        if good {
            Ok(())
        } else {
            Err(PhysicsError::InvalidShape(format!("{} dimensions must be positive and finite", self.name())))
        }
    }

    pub fn aabb(&self, pose: &Pose) -> Aabb {
        match self {
            CollisionShape::Sphere { radius } => Aabb::from_center_half_extents(pose.position, DVec3::splat(*radius)),
            CollisionShape::Capsule { radius, half_height } => {
                let axis = pose.orientation * DVec3::Y * *half_height;
                Aabb::from_points([pose.position + axis, pose.position - axis]).unwrap().inflate(*radius)
            }
            CollisionShape::Box { half_extents } => Aabb::of_oriented_box(pose.position, pose.orientation, *half_extents),
            CollisionShape::Convex(hull) => Aabb::from_points(hull.vertices.iter().map(|v| pose.transform_point(*v))).unwrap(),
            CollisionShape::TriMesh(mesh) => {
                let b = mesh.bounds;
                let c = b.center();
                let h = b.extents() * 0.5;
                Aabb::of_oriented_box(pose.transform_point(c), pose.orientation, h)
            }
        }
    }

    /// Inverse inertia tensor in body space for a solid of mass `mass`.
    pub fn inverse_inertia(&self, mass: f64) -> DMat3 {
        let diag = match self {
            CollisionShape::Sphere { radius } => DVec3::splat(0.4 * mass * radius * radius),
            CollisionShape::Box { half_extents } => box_inertia(mass, *half_extents),
            CollisionShape::Capsule { radius, half_height } => capsule_inertia(mass, *radius, *half_height),
            CollisionShape::Convex(hull) => {
                let b = Aabb::from_points(hull.vertices.iter().copied()).unwrap();
                box_inertia(mass, b.extents() * 0.5)
            }
            CollisionShape::TriMesh(_) => return DMat3::ZERO,
        };
        DMat3::from_diagonal(DVec3::ONE / diag)
    }
}

fn box_inertia(mass: f64, h: DVec3) -> DVec3 {
    DVec3::new(h.y * h.y + h.z * h.z, h.x * h.x + h.z * h.z, h.x * h.x + h.y * h.y) * (mass / 3.0)
}

/// Solid capsule along Y: cylinder plus two hemispheres, mass split by volume.
fn capsule_inertia(mass: f64, r: f64, hh: f64) -> DVec3 {
    use std::f64::consts::PI;
    let h = 2.0 * hh;
    let v_cyl = PI * r * r * h;
    let v_sph = 4.0 / 3.0 * PI * r * r * r;
    let m_cyl = mass * v_cyl / (v_cyl + v_sph);
    let m_hemi = 0.5 * mass * v_sph / (v_cyl + v_sph);
    let iy = 0.5 * m_cyl * r * r + 2.0 * (0.4 * m_hemi * r * r);
    let ix = m_cyl * (r * r / 4.0 + h * h / 12.0) + 2.0 * m_hemi * (0.4 * r * r + h * h / 4.0 + 3.0 * h * r / 8.0);
    DVec3::new(ix, iy, ix)
}

/// World-space description of a shape used by the narrowphase: a convex
/// "core" inflated by a radius, or a triangle mesh.
#[derive(Debug, Clone)]
pub(crate) enum Core {
    /// Point or segment, inflated by `radius`.
    Segment { a: DVec3, b: DVec3, radius: f64 },
    Box { pose: Pose, half: DVec3 },
    Hull { pose: Pose, hull: Arc<ConvexHull> },
    Triangle([DVec3; 3]),
}

impl Core {
    pub fn of(shape: &CollisionShape, pose: &Pose) -> Option<Core> {
        Some(match shape {
            CollisionShape::Sphere { radius } => Core::Segment { a: pose.position, b: pose.position, radius: *radius },
            CollisionShape::Capsule { radius, half_height } => {
                let axis = pose.orientation * DVec3::Y * *half_height;
                Core::Segment { a: pose.position - axis, b: pose.position + axis, radius: *radius }
            }
            CollisionShape::Box { half_extents } => Core::Box { pose: *pose, half: *half_extents },
            CollisionShape::Convex(hull) => Core::Hull { pose: *pose, hull: hull.clone() },
            CollisionShape::TriMesh(_) => return None,
        })
    }

    pub fn radius(&self) -> f64 {
        match self {
            Core::Segment { radius, .. } => *radius,
            _ => 0.0,
        }
    }

    /// Support point of the core (radius excluded).
    pub fn support(&self, dir: DVec3) -> DVec3 {
        match self {
            Core::Segment { a, b, .. } => {
                if b.dot(dir) > a.dot(dir) {
                    *b
                } else {
                    *a
                }
            }
            Core::Box { pose, half } => {
                let local = pose.orientation.inverse() * dir;
                let corner = DVec3::new(
                    if local.x >= 0.0 { half.x } else { -half.x },
                    if local.y >= 0.0 { half.y } else { -half.y },
                    if local.z >= 0.0 { half.z } else { -half.z },
                );
                pose.transform_point(corner)
            }
            Core::Hull { pose, hull } => pose.transform_point(hull.support(pose.orientation.inverse() * dir)),
            Core::Triangle(t) => {
                let mut best = t[0];
                for v in &t[1..] {
                    if v.dot(dir) > best.dot(dir) {
                        best = *v;
                    }
                }
                best
            }
        }
    }

    /// Vertices used for contact manifolds (polytopes only).
    pub fn vertices(&self) -> Vec<DVec3> {
        match self {
            Core::Segment { .. } => Vec::new(),
            Core::Box { pose, half } => (0..8)
                .map(|i| {
                    let s = DVec3::new(
                        if i & 1 == 0 { -1.0 } else { 1.0 },
                        if i & 2 == 0 { -1.0 } else { 1.0 },
                        if i & 4 == 0 { -1.0 } else { 1.0 },
                    );
                    pose.transform_point(*half * s)
                })
                .collect(),
            Core::Hull { pose, hull } => hull.vertices.iter().map(|v| pose.transform_point(*v)).collect(),
            Core::Triangle(t) => t.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_inverse_inertia() {
        let m = CollisionShape::sphere(0.5).inverse_inertia(2.0);
        let expected = 1.0 / (0.4 * 2.0 * 0.25);
        assert!((m.x_axis.x - expected).abs() < 1e-12);
        assert!((m.z_axis.z - expected).abs() < 1e-12);
    }

    #[test]
    fn capsule_inertia_tends_to_sphere() {
        let c = capsule_inertia(3.0, 0.7, 1e-9);
        let s = 0.4 * 3.0 * 0.49;
        assert!((c.x - s).abs() < 1e-6 && (c.y - s).abs() < 1e-6);
    }

    #[test]
    fn flat_convex_rejected() {
        let flat = vec![DVec3::ZERO, DVec3::X, DVec3::Z, DVec3::new(1.0, 0.0, 1.0)];
        assert!(ConvexHull::new(flat).is_err());
        let tet = vec![DVec3::ZERO, DVec3::X, DVec3::Y, DVec3::Z];
        assert!(ConvexHull::new(tet).is_ok());
    }
}
