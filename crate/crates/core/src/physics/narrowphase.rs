use glam::DVec3;

use super::geometry::{
    any_perpendicular, box_sdf, box_sdf_gradient, closest_segment_segment, closest_segment_triangle,
    min_box_sdf_on_segment,
};
use super::gjk::{epa, gjk, Gjk};
use super::shape::{CollisionShape, Core, Pose, TriMesh};
use super::PhysicsError;
use crate::spatial::Aabb;

/// Signed proximity between two shapes. `distance < 0` is penetration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximity {
    /// Unit vector pointing from the first shape into the second.
    pub normal: DVec3,
    pub distance: f64,
    /// Midpoint between the two surface witness points.
    pub point: DVec3,
}

impl Proximity {
    fn flipped(self) -> Proximity {
        Proximity { normal: -self.normal, ..self }
    }
}

/// Contact between two shapes as reported by [`narrowphase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeContact {
    pub point: DVec3,
    /// Unit vector from the first shape into the second.
    pub normal: DVec3,
    pub penetration_depth: f64,
}

fn fallback_normal(hint: DVec3) -> DVec3 {
    hint.try_normalize().map(any_perpendicular).unwrap_or(DVec3::Y)
}

fn segment_segment(a0: DVec3, a1: DVec3, ra: f64, b0: DVec3, b1: DVec3, rb: f64) -> Proximity {
    let (_, _, ca, cb) = closest_segment_segment(a0, a1, b0, b1);
    let d = cb - ca;
    let len = d.length();
    let normal = if len > 1e-12 { d / len } else { fallback_normal(a1 - a0) };
    let sa = ca + normal * ra;
    let sb = cb - normal * rb;
    Proximity { normal, distance: len - ra - rb, point: (sa + sb) * 0.5 }
}

fn segment_box(a0: DVec3, a1: DVec3, r: f64, pose: &Pose, half: DVec3) -> Proximity {
    let la = pose.inverse_transform_point(a0);
    let lb = pose.inverse_transform_point(a1);
    let (t, sdf) = min_box_sdf_on_segment(la, lb, half);
    let p = la + (lb - la) * t;
    let grad = box_sdf_gradient(p, half);
    let normal = pose.orientation * -grad;
    let surface_box = pose.transform_point(p - grad * sdf);
    let surface_seg = pose.transform_point(p) + normal * r;
    Proximity { normal, distance: sdf - r, point: (surface_box + surface_seg) * 0.5 }
}

fn segment_triangle(a0: DVec3, a1: DVec3, r: f64, tri: [DVec3; 3]) -> Proximity {
    let (cs, ct) = closest_segment_triangle(a0, a1, tri);
    let d = ct - cs;
    let len = d.length();
    if len > 1e-12 {
        let normal = d / len;
        return Proximity { normal, distance: len - r, point: (cs + normal * r + ct) * 0.5 };
    }
    // Core touches or crosses the triangle: push out along the face normal on
    // the side holding the segment midpoint.
    let face = (tri[1] - tri[0]).cross(tri[2] - tri[0]).normalize_or(DVec3::Y);
    let mid = (a0 + a1) * 0.5;
    let side = if face.dot(mid - tri[0]) >= 0.0 { 1.0 } else { -1.0 };
    let normal = face * -side;
    let lowest = [a0, a1].iter().map(|p| side * face.dot(*p - tri[0])).fold(f64::INFINITY, f64::min).min(0.0);
    Proximity { normal, distance: lowest - r, point: ct }
}

fn polytope(a: &Core, b: &Core) -> Proximity {
    let (ra, rb) = (a.radius(), b.radius());
    match gjk(a, b) {
        Gjk::Separated { distance, point_a, point_b } => {
            let normal = (point_b - point_a) / distance;
            let sa = point_a + normal * ra;
            let sb = point_b - normal * rb;
            Proximity { normal, distance: distance - ra - rb, point: (sa + sb) * 0.5 }
        }
        Gjk::Overlapping(simplex) => match epa(a, b, simplex) {
            Some(p) => Proximity { normal: p.normal, distance: -(p.depth + ra + rb), point: (p.point_a + p.point_b) * 0.5 },
            None => {
                // Degenerate overlap (e.g. touching flat features): report zero depth
                // along the centre line.
                let ca = a.support(DVec3::X) * 0.5 + a.support(-DVec3::X) * 0.5;
                let cb = b.support(DVec3::X) * 0.5 + b.support(-DVec3::X) * 0.5;
                let normal = (cb - ca).try_normalize().unwrap_or(DVec3::Y);
                Proximity { normal, distance: -(ra + rb), point: (ca + cb) * 0.5 }
            }
        },
    }
}

/// Proximity between two convex cores.
pub(crate) fn core_proximity(a: &Core, b: &Core) -> Proximity {
    match (a, b) {
        (Core::Segment { a: a0, b: a1, radius: ra }, Core::Segment { a: b0, b: b1, radius: rb }) => {
            segment_segment(*a0, *a1, *ra, *b0, *b1, *rb)
        }
        (Core::Segment { a: a0, b: a1, radius }, Core::Box { pose, half }) => segment_box(*a0, *a1, *radius, pose, *half),
        (Core::Box { pose, half }, Core::Segment { a: b0, b: b1, radius }) => {
            segment_box(*b0, *b1, *radius, pose, *half).flipped()
        }
        (Core::Segment { a: a0, b: a1, radius }, Core::Triangle(t)) => segment_triangle(*a0, *a1, *radius, *t),
        (Core::Triangle(t), Core::Segment { a: b0, b: b1, radius }) => segment_triangle(*b0, *b1, *radius, *t).flipped(),
        _ => polytope(a, b),
    }
}

/// Contact of the deepest point between two shapes, `None` when separated.
///
/// Spheres, capsules and boxes use exact closest-feature computations;
/// boxes against boxes and anything involving a convex hull use GJK with
/// EPA. Triangle meshes are tested triangle by triangle through their BVH.
pub fn narrowphase(
    shape_a: &CollisionShape,
    pose_a: &Pose,
    shape_b: &CollisionShape,
    pose_b: &Pose,
) -> Result<Option<ShapeContact>, PhysicsError> {
    Ok(proximity(shape_a, pose_a, shape_b, pose_b, 0.0)?.and_then(|p| {
        (p.distance <= 0.0).then_some(ShapeContact { point: p.point, normal: p.normal, penetration_depth: -p.distance })
    }))
}

/// Deepest proximity with `distance <= margin`, if any.
pub fn proximity(
    shape_a: &CollisionShape,
    pose_a: &Pose,
    shape_b: &CollisionShape,
    pose_b: &Pose,
    margin: f64,
) -> Result<Option<Proximity>, PhysicsError> {
    let best = pair_cores(shape_a, pose_a, shape_b, pose_b, margin)?
        .into_iter()
        .map(|(a, b)| core_proximity(&a, &b))
        .filter(|p| p.distance <= margin)
        .min_by(|x, y| x.distance.total_cmp(&y.distance));
    Ok(best)
}

/// Core pairs to test, expanding triangle meshes into the triangles near
/// the other shape.
pub(crate) fn pair_cores(
    shape_a: &CollisionShape,
    pose_a: &Pose,
    shape_b: &CollisionShape,
    pose_b: &Pose,
    margin: f64,
) -> Result<Vec<(Core, Core)>, PhysicsError> {
    match (shape_a, shape_b) {
        (CollisionShape::TriMesh(_), CollisionShape::TriMesh(_)) => {
            Err(PhysicsError::Unsupported("triangle mesh against triangle mesh".into()))
        }
        (CollisionShape::TriMesh(_), other) => {
            Ok(pair_cores(other, pose_b, shape_a, pose_a, margin)?.into_iter().map(|(o, t)| (t, o)).collect())
        }
        (other, CollisionShape::TriMesh(mesh)) => {
            let core = Core::of(other, pose_a).expect("convex shape");
            Ok(nearby_triangles(mesh, pose_b, &other.aabb(pose_a).inflate(margin.max(0.0) + 1e-9))
                .into_iter()
                .map(|t| (core.clone(), Core::Triangle(t)))
                .collect())
        }
        _ => Ok(vec![(Core::of(shape_a, pose_a).unwrap(), Core::of(shape_b, pose_b).unwrap())]),
    }
}

/// World-space triangles of `mesh` whose bounds overlap `region`.
pub(crate) fn nearby_triangles(mesh: &TriMesh, pose: &Pose, region: &Aabb) -> Vec<[DVec3; 3]> {
    let corners = (0..8).map(|i| {
        DVec3::new(
            if i & 1 == 0 { region.min.x } else { region.max.x },
            if i & 2 == 0 { region.min.y } else { region.max.y },
            if i & 4 == 0 { region.min.z } else { region.max.z },
        )
    });
    let local = Aabb::from_points(corners.map(|c| pose.inverse_transform_point(c))).unwrap();
    mesh.triangles_in(&local)
        .into_iter()
        .map(|i| {
            let t = mesh.triangle(i);
            [pose.transform_point(t[0]), pose.transform_point(t[1]), pose.transform_point(t[2])]
        })
        .collect()
}

/// One point of a contact manifold. `separation < 0` is penetration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldPoint {
    pub point: DVec3,
    pub normal: DVec3,
    pub separation: f64,
}

pub(crate) const MAX_MANIFOLD_POINTS: usize = 4;

/// Up to four contact points within `margin`, deepest first.
pub(crate) fn manifold(
    shape_a: &CollisionShape,
    pose_a: &Pose,
    shape_b: &CollisionShape,
    pose_b: &Pose,
    margin: f64,
) -> Result<Vec<ManifoldPoint>, PhysicsError> {
    let mut points = Vec::new();
    for (a, b) in pair_cores(shape_a, pose_a, shape_b, pose_b, margin)? {
        let deepest = core_proximity(&a, &b);
        if deepest.distance > margin {
            continue;
        }
        let n = deepest.normal;
        points.push(ManifoldPoint { point: deepest.point, normal: n, separation: deepest.distance });
        feature_points(&a, &b, n, margin, false, &mut points);
        feature_points(&b, &a, -n, margin, true, &mut points);
    }
    Ok(reduce_manifold(points))
}

/// Extra manifold points from the features of `a` (segment end caps or
/// polytope vertices) that lie within `margin` of `b`. `n` points from `a`
/// into `b`.
fn feature_points(a: &Core, b: &Core, n: DVec3, margin: f64, flip: bool, out: &mut Vec<ManifoldPoint>) {
    let normal = if flip { -n } else { n };
    match a {
        Core::Segment { a: s0, b: s1, radius } => {
            if s0 == s1 {
                return;
            }
            for e in [*s0, *s1] {
                let p = core_proximity(&Core::Segment { a: e, b: e, radius: *radius }, b);
                if p.distance <= margin {
                    out.push(ManifoldPoint {
                        point: p.point,
                        normal: if flip { -p.normal } else { p.normal },
                        separation: p.distance,
                    });
                }
            }
        }
        Core::Triangle(_) | Core::Box { .. } | Core::Hull { .. } => {
            // Plane of b's extreme point opposite to n.
            let h_b = b.support(-n).dot(n) - b.radius();
            for v in a.vertices() {
                let p = core_proximity(&Core::Segment { a: v, b: v, radius: 0.0 }, b);
                if p.distance <= margin {
                    let sep = h_b - v.dot(n);
                    out.push(ManifoldPoint { point: v + n * (0.5 * sep), normal, separation: sep });
                }
            }
        }
    }
}

fn reduce_manifold(mut points: Vec<ManifoldPoint>) -> Vec<ManifoldPoint> {
    if points.len() <= 1 {
        return points;
    }
    // Deepest first; stable so ties keep generation order.
    points.sort_by(|a, b| a.separation.total_cmp(&b.separation));
    let mut chosen = vec![points[0]];
    while chosen.len() < MAX_MANIFOLD_POINTS {
        let mut best: Option<(f64, usize)> = None;
        for (i, p) in points.iter().enumerate() {
            let d = chosen.iter().map(|c| c.point.distance_squared(p.point)).fold(f64::INFINITY, f64::min);
            if d > 1e-8 && best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, i));
            }
        }
        match best {
            Some((_, i)) => chosen.push(points[i]),
            None => break,
        }
    }
    chosen
}

/// Signed distance from a world point to a box, exposed for tests and
/// oracles.
pub fn box_signed_distance(point: DVec3, pose: &Pose, half_extents: DVec3) -> f64 {
    box_sdf(pose.inverse_transform_point(point), half_extents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use glam::DQuat;

    #[test]
    fn spheres_overlap_and_touch() {
        let s = CollisionShape::sphere(1.0);
        let c = narrowphase(&s, &Pose::IDENTITY, &s, &Pose::from_position(DVec3::new(1.5, 0.0, 0.0))).unwrap().unwrap();
        assert!((c.penetration_depth - 0.5).abs() < 1e-12);
        assert!((c.normal - DVec3::X).length() < 1e-12);
        let c = narrowphase(&s, &Pose::IDENTITY, &s, &Pose::from_position(DVec3::new(2.0, 0.0, 0.0))).unwrap().unwrap();
        assert_eq!(c.penetration_depth, 0.0);
        assert!(narrowphase(&s, &Pose::IDENTITY, &s, &Pose::from_position(DVec3::new(2.1, 0.0, 0.0))).unwrap().is_none());
    }

    #[test]
    fn capsule_on_box_face() {
        let cap = CollisionShape::capsule(0.5, 0.5);
        let bx = CollisionShape::cuboid(DVec3::splat(0.5));
        let c = narrowphase(&bx, &Pose::IDENTITY, &cap, &Pose::from_position(DVec3::new(0.2, 1.4, 0.0))).unwrap().unwrap();
        // Lower cap centre at y = 0.9, radius 0.5, face at y = 0.5.
        assert!((c.penetration_depth - 0.1).abs() < 1e-12);
        assert!((c.normal - DVec3::Y).length() < 1e-12);
    }

    #[test]
    fn swapping_flips_normal() {
        let cap = CollisionShape::capsule(0.3, 0.6);
        let bx = CollisionShape::cuboid(DVec3::new(0.5, 0.4, 0.7));
        let pa = Pose::new(DVec3::new(0.3, 0.8, -0.2), DQuat::from_rotation_z(0.4));
        let pb = Pose::new(DVec3::ZERO, DQuat::from_rotation_y(0.3));
        let ab = narrowphase(&cap, &pa, &bx, &pb).unwrap().unwrap();
        let ba = narrowphase(&bx, &pb, &cap, &pa).unwrap().unwrap();
        assert!((ab.penetration_depth - ba.penetration_depth).abs() < 1e-9);
        assert!((ab.normal + ba.normal).length() < 1e-9);
    }

    #[test]
    fn trimesh_pairs() {
        let mesh = TriMesh::new(
            vec![DVec3::new(-5.0, 0.0, -5.0), DVec3::new(5.0, 0.0, -5.0), DVec3::new(5.0, 0.0, 5.0), DVec3::new(-5.0, 0.0, 5.0)],
            vec![[0, 2, 1], [0, 3, 2]],
        )
        .unwrap();
        let floor = CollisionShape::trimesh(mesh);
        let s = CollisionShape::sphere(0.5);
        let c = narrowphase(&s, &Pose::from_position(DVec3::new(1.0, 0.4, 1.0)), &floor, &Pose::IDENTITY).unwrap().unwrap();
        assert!((c.penetration_depth - 0.1).abs() < 1e-12);
        assert!((c.normal + DVec3::Y).length() < 1e-12);
        assert!(narrowphase(&floor, &Pose::IDENTITY, &floor, &Pose::IDENTITY).is_err());
        let bx = CollisionShape::cuboid(DVec3::splat(0.5));
        let m = manifold(&bx, &Pose::from_position(DVec3::new(0.3, 0.49, 0.2)), &floor, &Pose::IDENTITY, 0.02).unwrap();
        assert_eq!(m.len(), 4);
        for p in &m {
            assert!((p.separation + 0.01).abs() < 1e-9, "{p:?}");
        }
    }
}
