//! GJK distance and EPA penetration over support-mapped cores.

use glam::DVec3;

use super::shape::Core;

const MAX_GJK_ITERATIONS: usize = 64;
const MAX_EPA_ITERATIONS: usize = 128;
const EPA_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub(crate) struct SupportPoint {
    /// Minkowski difference point `a - b`.
    pub w: DVec3,
    pub a: DVec3,
    pub b: DVec3,
}

fn support(a: &Core, b: &Core, dir: DVec3) -> SupportPoint {
    let pa = a.support(dir);
    let pb = b.support(-dir);
    SupportPoint { w: pa - pb, a: pa, b: pb }
}

#[derive(Debug, Clone)]
pub(crate) enum Gjk {
    /// Cores are disjoint; witness points on each core.
    Separated { distance: f64, point_a: DVec3, point_b: DVec3 },
    /// Cores overlap (or touch); final simplex for EPA.
    Overlapping(Vec<SupportPoint>),
}

/// Closest point of the simplex to the origin. Shrinks `simplex` to the
/// supporting sub-simplex and returns the point, or `None` when the origin
/// lies inside a tetrahedron.
fn reduce(simplex: &mut Vec<SupportPoint>, lambdas: &mut Vec<f64>) -> Option<DVec3> {
    match simplex.len() {
        1 => {
            *lambdas = vec![1.0];
            Some(simplex[0].w)
        }
        2 => {
            let (a, b) = (simplex[0].w, simplex[1].w);
            let ab = b - a;
            let len2 = ab.length_squared();
            let t = if len2 > 0.0 { (-a.dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            if t <= 0.0 {
                simplex.truncate(1);
                *lambdas = vec![1.0];
                Some(a)
            } else if t >= 1.0 {
                simplex.remove(0);
                *lambdas = vec![1.0];
                Some(b)
            } else {
                *lambdas = vec![1.0 - t, t];
                Some(a + ab * t)
            }
        }
        3 => {
            let (keep, l, p) = closest_on_triangle(simplex[0].w, simplex[1].w, simplex[2].w);
            let kept: Vec<SupportPoint> = keep.iter().map(|&i| simplex[i]).collect();
            *simplex = kept;
            *lambdas = l;
            Some(p)
        }
        4 => {
            let pts: Vec<DVec3> = simplex.iter().map(|s| s.w).collect();
            let faces = [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1], [1, 2, 3, 0]];
            let mut best: Option<(f64, Vec<usize>, Vec<f64>, DVec3)> = None;
            let mut inside = true;
            for f in faces {
                let (a, b, c, d) = (pts[f[0]], pts[f[1]], pts[f[2]], pts[f[3]]);
                let n = (b - a).cross(c - a);
                let side_origin = n.dot(-a);
                let side_other = n.dot(d - a);
                if side_origin * side_other < 0.0 || (side_other == 0.0 && side_origin != 0.0) {
                    inside = false;
                    let (keep, l, p) = closest_on_triangle(a, b, c);
                    let dist = p.length_squared();
                    if best.as_ref().is_none_or(|b| dist < b.0) {
                        best = Some((dist, keep.iter().map(|&k| f[k]).collect(), l, p));
                    }
                }
            }
            if inside {
                return None;
            }
            let (_, keep, l, p) = best.unwrap();
            let kept: Vec<SupportPoint> = keep.iter().map(|&i| simplex[i]).collect();
            *simplex = kept;
            *lambdas = l;
            Some(p)
        }
        _ => unreachable!("simplex has 1..=4 points"),
    }
}

/// Closest point of triangle `abc` to the origin with the supporting vertex
/// indices and their barycentric weights.
fn closest_on_triangle(a: DVec3, b: DVec3, c: DVec3) -> (Vec<usize>, Vec<f64>, DVec3) {
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (vec![0], vec![1.0], a);
    }
    let bp = -b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (vec![1], vec![1.0], b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (vec![0, 1], vec![1.0 - v, v], a + ab * v);
    }
    let cp = -c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (vec![2], vec![1.0], c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (vec![0, 2], vec![1.0 - w, w], a + ac * w);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (vec![1, 2], vec![1.0 - w, w], b + (c - b) * w);
    }
    let denom = va + vb + vc;
    if denom.abs() < 1e-300 {
        // Degenerate triangle: fall back to its best edge.
        return (vec![0], vec![1.0], a);
    }
    let v = vb / denom;
    let w = vc / denom;
    (vec![0, 1, 2], vec![1.0 - v - w, v, w], a + ab * v + ac * w)
}

pub(crate) fn gjk(a: &Core, b: &Core) -> Gjk {
    let init_dir = {
        let d = a.support(DVec3::X) - b.support(-DVec3::X);
        if d.length_squared() > 0.0 {
            -d
        } else {
            DVec3::X
        }
    };
    let mut simplex = vec![support(a, b, -init_dir)];
    let mut lambdas = vec![1.0];
    let mut v = simplex[0].w;
    for _ in 0..MAX_GJK_ITERATIONS {
        let vv = v.length_squared();
        if vv <= 1e-24 {
            return Gjk::Overlapping(simplex);
        }
        let w = support(a, b, -v);
        // Converged: the new support point makes no progress toward the origin.
        if vv - v.dot(w.w) <= 1e-12 * vv.max(1e-12) || simplex.iter().any(|s| s.w == w.w) {
            break;
        }
        let (kept, kept_lambdas) = (simplex.clone(), lambdas.clone());
        simplex.push(w);
        match reduce(&mut simplex, &mut lambdas) {
            None => return Gjk::Overlapping(simplex),
            Some(p) => {
                if p.length_squared() >= vv {
                    // Numerical stall; keep the previous answer.
                    simplex = kept;
                    lambdas = kept_lambdas;
                    break;
                }
                v = p;
            }
        }
    }
    if simplex.len() != lambdas.len() {
        let _ = reduce(&mut simplex, &mut lambdas);
    }
    let point_a = simplex.iter().zip(&lambdas).fold(DVec3::ZERO, |acc, (s, l)| acc + s.a * *l);
    let point_b = simplex.iter().zip(&lambdas).fold(DVec3::ZERO, |acc, (s, l)| acc + s.b * *l);
    let distance = (point_a - point_b).length();
    if distance <= 1e-12 {
        return Gjk::Overlapping(simplex);
    }
    Gjk::Separated { distance, point_a, point_b }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Penetration {
    /// Direction from core A into core B.
    pub normal: DVec3,
    pub depth: f64,
    pub point_a: DVec3,
    pub point_b: DVec3,
}

#[derive(Clone, Copy)]
struct Face {
    idx: [usize; 3],
    normal: DVec3,
    dist: f64,
}

fn make_face(pts: &[SupportPoint], idx: [usize; 3], interior: DVec3) -> Option<Face> {
    let (a, b, c) = (pts[idx[0]].w, pts[idx[1]].w, pts[idx[2]].w);
    let mut n = (b - a).cross(c - a);
    let len = n.length();
    if len < 1e-18 {
        return None;
    }
    n /= len;
    let mut idx = idx;
    if n.dot(a - interior) < 0.0 {
        n = -n;
        idx.swap(1, 2);
    }
    Some(Face { idx, normal: n, dist: n.dot(a) })
}

/// Grow a lower-dimensional simplex into a tetrahedron.
fn complete_simplex(a: &Core, b: &Core, simplex: &mut Vec<SupportPoint>) -> bool {
    const DIRS: [DVec3; 6] = [DVec3::X, DVec3::Y, DVec3::Z, DVec3::NEG_X, DVec3::NEG_Y, DVec3::NEG_Z];
    if simplex.len() == 1 {
        for d in DIRS {
            let s = support(a, b, d);
            if (s.w - simplex[0].w).length_squared() > 1e-20 {
                simplex.push(s);
                break;
            }
        }
    }
    if simplex.len() == 2 {
        let axis = simplex[1].w - simplex[0].w;
        let p = super::geometry::any_perpendicular(axis.normalize());
        let q = axis.normalize().cross(p);
        for d in [p, q, -p, -q, p + q, -p - q] {
            let s = support(a, b, d);
            if axis.cross(s.w - simplex[0].w).length_squared() > 1e-20 {
                simplex.push(s);
                break;
            }
        }
    }
    if simplex.len() == 3 {
        let n = (simplex[1].w - simplex[0].w).cross(simplex[2].w - simplex[0].w);
        for d in [n, -n] {
            let s = support(a, b, d);
            if n.dot(s.w - simplex[0].w).abs() > 1e-14 * n.length() {
                simplex.push(s);
                break;
            }
        }
    }
    simplex.len() == 4
}

pub(crate) fn epa(a: &Core, b: &Core, simplex: Vec<SupportPoint>) -> Option<Penetration> {
    let mut pts = simplex;
    if !complete_simplex(a, b, &mut pts) {
        return None;
    }
    let interior = pts.iter().fold(DVec3::ZERO, |acc, p| acc + p.w) / 4.0;
    let mut faces: Vec<Face> =
        [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]].iter().filter_map(|&f| make_face(&pts, f, interior)).collect();
    if faces.len() < 4 {
        return None;
    }
    let mut best = faces[0];
    for _ in 0..MAX_EPA_ITERATIONS {
        best = *faces.iter().min_by(|x, y| x.dist.total_cmp(&y.dist)).unwrap();
        let s = support(a, b, best.normal);
        let gain = s.w.dot(best.normal) - best.dist;
        if gain < EPA_TOLERANCE || pts.iter().any(|p| p.w == s.w) {
            break;
        }
        pts.push(s);
        let new_index = pts.len() - 1;
        let mut horizon: Vec<[usize; 2]> = Vec::new();
        faces.retain(|f| {
            let visible = f.normal.dot(s.w - pts[f.idx[0]].w) > 1e-12;
            if visible {
                for e in [[f.idx[0], f.idx[1]], [f.idx[1], f.idx[2]], [f.idx[2], f.idx[0]]] {
                    if let Some(k) = horizon.iter().position(|h| h[0] == e[1] && h[1] == e[0]) {
                        horizon.remove(k);
                    } else {
                        horizon.push(e);
                    }
                }
            }
            !visible
        });
        for e in horizon {
            if let Some(f) = make_face(&pts, [e[0], e[1], new_index], interior) {
                faces.push(f);
            }
        }
        if faces.is_empty() {
            return None;
        }
    }
    let [i, j, k] = best.idx;
    let p = best.normal * best.dist;
    let (u, v, w) = barycentric(p, pts[i].w, pts[j].w, pts[k].w);
    let point_a = pts[i].a * u + pts[j].a * v + pts[k].a * w;
    let point_b = pts[i].b * u + pts[j].b * v + pts[k].b * w;
    Some(Penetration { normal: best.normal, depth: best.dist.max(0.0), point_a, point_b })
}

fn barycentric(p: DVec3, a: DVec3, b: DVec3, c: DVec3) -> (f64, f64, f64) {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let d00 = v0.dot(v0);
    let d01 = v0.dot(v1);
    let d11 = v1.dot(v1);
    let d20 = v2.dot(v0);
    let d21 = v2.dot(v1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() < 1e-300 {
        return (1.0, 0.0, 0.0);
    }
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    (1.0 - v - w, v, w)
}
