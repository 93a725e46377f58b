//! Closest-point primitives shared by the narrowphase and sweeps.

use glam::DVec3;

const EPS: f64 = 1e-14;

/// Closest points between segments `p1-q1` and `p2-q2`, as `(s, t, c1, c2)`.
pub fn closest_segment_segment(p1: DVec3, q1: DVec3, p2: DVec3, q2: DVec3) -> (f64, f64, DVec3, DVec3) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return (0.0, 0.0, p1, p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > EPS * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (s, t, p1 + d1 * s, p2 + d2 * t)
}

/// Closest point on triangle `abc` to `p`.
pub fn closest_point_on_triangle(p: DVec3, a: DVec3, b: DVec3, c: DVec3) -> DVec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Parameter where segment `p-q` crosses triangle `abc`, if it does.
pub fn segment_triangle_intersection(p: DVec3, q: DVec3, a: DVec3, b: DVec3, c: DVec3) -> Option<f64> {
    let n = (b - a).cross(c - a);
    let dp = n.dot(p - a);
    let dq = n.dot(q - a);
    if (dp > 0.0 && dq > 0.0) || (dp < 0.0 && dq < 0.0) || dp == dq {
        return None;
    }
    let t = dp / (dp - dq);
    let x = p + (q - p) * t;
    let inside = |u: DVec3, v: DVec3| n.dot((v - u).cross(x - u)) >= 0.0;
    (inside(a, b) && inside(b, c) && inside(c, a)).then_some(t)
}

/// Closest points between segment `p-q` and triangle `abc`: `(on_segment, on_triangle)`.
pub fn closest_segment_triangle(p: DVec3, q: DVec3, tri: [DVec3; 3]) -> (DVec3, DVec3) {
    let [a, b, c] = tri;
    if let Some(t) = segment_triangle_intersection(p, q, a, b, c) {
        let x = p + (q - p) * t;
        return (x, x);
    }
    let mut best = {
        let cp = closest_point_on_triangle(p, a, b, c);
        (cp.distance_squared(p), p, cp)
    };
    let mut consider = |s: DVec3, t: DVec3| {
        let d = s.distance_squared(t);
        if d < best.0 {
            best = (d, s, t);
        }
    };
    let cq = closest_point_on_triangle(q, a, b, c);
    consider(q, cq);
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let (_, _, s, t) = closest_segment_segment(p, q, u, v);
        consider(s, t);
    }
    (best.1, best.2)
}

/// Signed distance from `p` to an origin-centred box; negative inside.
pub fn box_sdf(p: DVec3, half: DVec3) -> f64 {
    let d = p.abs() - half;
    let outside = d.max(DVec3::ZERO).length();
    let inside = d.max_element().min(0.0);
    outside + inside
}

/// Outward unit gradient of [`box_sdf`] at `p`.
pub fn box_sdf_gradient(p: DVec3, half: DVec3) -> DVec3 {
    let d = p.abs() - half;
    let sign = DVec3::new(sign_of(p.x), sign_of(p.y), sign_of(p.z));
    if d.max_element() > 0.0 {
        let g = d.max(DVec3::ZERO) * sign;
        return g / g.length();
    }
    // Inside: nearest face. Ties resolve to the lowest axis.
    let axis = if d.x >= d.y && d.x >= d.z {
        0
    } else if d.y >= d.z {
        1
    } else {
        2
    };
    let mut g = DVec3::ZERO;
    g[axis] = sign[axis];
    g
}

fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Minimum of the box signed distance along segment `a-b` (box-local
/// coordinates). Returns `(t, sdf)`.
///
/// The signed distance of a convex set is convex along any line and is
/// piecewise either quadratic (outside, squared) or linear (inside), so the
/// minimum lies at an endpoint, a piece boundary, a face-switch point or a
/// piece's stationary point. All candidates are evaluated exactly.
pub fn min_box_sdf_on_segment(a: DVec3, b: DVec3, half: DVec3) -> (f64, f64) {
    let d = b - a;
    let mut cands: Vec<f64> = vec![0.0, 1.0];
    let push = |c: &mut Vec<f64>, t: f64| {
        if t.is_finite() && (0.0..=1.0).contains(&t) {
            c.push(t);
        }
    };
    for i in 0..3 {
        if d[i] != 0.0 {
            for target in [-half[i], 0.0, half[i]] {
                push(&mut cands, (target - a[i]) / d[i]);
            }
        }
    }
    // Inside face switches: s_i p_i - h_i = s_j p_j - h_j.
    for i in 0..3 {
        for j in (i + 1)..3 {
            for si in [-1.0, 1.0] {
                for sj in [-1.0, 1.0] {
                    let k = si * d[i] - sj * d[j];
                    if k != 0.0 {
                        push(&mut cands, (half[i] - half[j] - si * a[i] + sj * a[j]) / k);
                    }
                }
            }
        }
    }
    let mut breaks = cands.clone();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // Stationary point of the outside quadratic on each piece.
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = a + d * (0.5 * (lo + hi));
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..3 {
            if mid[i].abs() > half[i] {
                let s = sign_of(mid[i]);
                // s * (a_i + d_i t) - h_i
                let c0 = s * a[i] - half[i];
                let c1 = s * d[i];
                num += c0 * c1;
                den += c1 * c1;
            }
        }
        if den > 0.0 {
            push(&mut cands, (-num / den).clamp(lo, hi));
        }
    }
    let mut best = (0.0, f64::INFINITY);
    for t in cands {
        let v = box_sdf(a + d * t, half);
        if v < best.1 || (v == best.1 && t < best.0) {
            best = (t, v);
        }
    }
    best
}

/// A deterministic unit vector orthogonal to `n`.
pub fn any_perpendicular(n: DVec3) -> DVec3 {
    let helper = if n.x.abs() < 0.57 { DVec3::X } else { DVec3::Y };
    n.cross(helper).normalize()
}
