//! Linking numbers of closed curves: the Gauss double sum and a signed
//! crossing count in a planar projection.

use std::f64::consts::PI;

use crate::branch::{dist, Polyline};

use super::MorphismError;

/// Minimal admissible distance between two curves.
pub const MIN_CURVE_DISTANCE: f64 = 1e-3;

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn v3(x: &[f64]) -> V3 {
    [x[0], x[1], x[2]]
}

fn check_r3_loop(c: &Polyline) -> Result<(), MorphismError> {
    if c.dim() != 3 {
        return Err(MorphismError::DimensionMismatch { expected: 3, got: c.dim() });
    }
    if !c.is_closed() {
        return Err(MorphismError::InvalidCurve("curve must be closed".into()));
    }
    Ok(())
}

/// Minimum distance between two polylines, measured segment to segment
/// (exact below 1, a lower bound above).
pub fn curve_distance(c1: &Polyline, c2: &Polyline) -> f64 {
    let mut best = f64::INFINITY;
    for (a0, a1) in c1.segments() {
        for (b0, b1) in c2.segments() {
            best = best.min(segment_distance(a0, a1, b0, b1));
        }
    }
    best
}

fn segment_distance(a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]) -> f64 {
    // Far pairs only need a lower bound.
    let bound = dist(a0, b0) - dist(a0, a1) - dist(b0, b1);
    if bound > 1.0 {
        return bound;
    }
    let n = a0.len();
    let u: Vec<f64> = (0..n).map(|k| a1[k] - a0[k]).collect();
    let v: Vec<f64> = (0..n).map(|k| b1[k] - b0[k]).collect();
    let w: Vec<f64> = (0..n).map(|k| a0[k] - b0[k]).collect();
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (a, b, c, dd, e) = (d(&u, &u), d(&u, &v), d(&v, &v), d(&u, &w), d(&v, &w));
    let den = a * c - b * b;
    let mut s = if den > 1e-14 * a * c { ((b * e - c * dd) / den).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = ((b * s + e) / c).clamp(0.0, 1.0);
    s = ((b * t - dd) / a).clamp(0.0, 1.0);
    t = ((b * s + e) / c).clamp(0.0, 1.0);
    (0..n)
        .map(|k| w[k] + s * u[k] - t * v[k])
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// `(1/4 pi) sum_i sum_j (m_i - m_j) . (d_i x d_j) / |m_i - m_j|^3` over
/// segment midpoints `m` and segment vectors `d` of two closed curves in R^3.
pub fn gauss_linking(c1: &Polyline, c2: &Polyline) -> Result<f64, MorphismError> {
    check_r3_loop(c1)?;
    check_r3_loop(c2)?;
    let distance = curve_distance(c1, c2);
    if distance < MIN_CURVE_DISTANCE {
        return Err(MorphismError::CurvesTooClose { distance });
    }
    let seg = |c: &Polyline| -> Vec<(V3, V3)> {
        c.segments()
            .map(|(a, b)| {
                let (a, b) = (v3(a), v3(b));
                ([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0], sub(b, a))
            })
            .collect()
    };
    let s1 = seg(c1);
    let s2 = seg(c2);
    let mut total = 0.0;
    for &(m1, d1) in &s1 {
        let mut row = 0.0;
        for &(m2, d2) in &s2 {
            let r = sub(m1, m2);
            let n = dot(r, r).sqrt();
            row += dot(r, cross(d1, d2)) / (n * n * n);
        }
        total += row;
    }
    Ok(total / (4.0 * PI))
}

/// Half the sum of signed crossings between `c1` and `c2` in the projection
/// along `view` (any generic direction).
pub fn crossing_linking_number(c1: &Polyline, c2: &Polyline, view: V3) -> Result<i64, MorphismError> {
    check_r3_loop(c1)?;
    check_r3_loop(c2)?;
    let nv = dot(view, view).sqrt();
    let n = [view[0] / nv, view[1] / nv, view[2] / nv];
    // Orthonormal (e1, e2, n), right-handed.
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let c = cross(helper, n);
        let l = dot(c, c).sqrt();
        [c[0] / l, c[1] / l, c[2] / l]
    };
    let e2 = cross(n, e1);
    let proj = |c: &Polyline| -> Vec<(V3, V3)> {
        c.segments()
            .map(|(a, b)| {
                let (a, b) = (v3(a), v3(b));
                ([dot(a, e1), dot(a, e2), dot(a, n)], [dot(b, e1), dot(b, e2), dot(b, n)])
            })
            .collect()
    };
    let p1 = proj(c1);
    let p2 = proj(c2);
    let mut signed = 0i64;
    for &(a0, a1) in &p1 {
        let da = sub(a1, a0);
        for &(b0, b1) in &p2 {
            let db = sub(b1, b0);
            let den = da[0] * db[1] - da[1] * db[0];
            if den == 0.0 {
                continue;
            }
            let wx = b0[0] - a0[0];
            let wy = b0[1] - a0[1];
            let s = (wx * db[1] - wy * db[0]) / den;
            let t = (wx * da[1] - wy * da[0]) / den;
            if !(0.0..1.0).contains(&s) || !(0.0..1.0).contains(&t) {
                continue;
            }
            let ha = a0[2] + s * da[2];
            let hb = b0[2] + t * db[2];
            // Right-handed crossing: over strand rotated counterclockwise
            // (seen from +n) onto the under strand.
            let (over, under) = if ha > hb { (da, db) } else { (db, da) };
            let orient = over[0] * under[1] - over[1] * under[0];
            signed += if orient > 0.0 { 1 } else { -1 };
        }
    }
    Ok(signed / 2)
}

/// Stereographic projection of a closed curve on `S^3` from `pole`; the
/// frame is chosen so that the projection preserves orientation.
pub fn project_to_r3(curve: &Polyline, pole: [f64; 4]) -> Result<Polyline, MorphismError> {
    if curve.dim() != 4 {
        return Err(MorphismError::DimensionMismatch { expected: 4, got: curve.dim() });
    }
    let frame = complement_frame(pole);
    let mut out = Vec::with_capacity(curve.len() * 3);
    for x in curve.points() {
        let den = 1.0 - (0..4).map(|k| x[k] * pole[k]).sum::<f64>();
        if den < 1e-9 {
            return Err(MorphismError::ImageAtInfinity);
        }
        for e in &frame {
            out.push((0..4).map(|k| x[k] * e[k]).sum::<f64>() / den);
        }
    }
    Polyline::from_flat(3, out, curve.is_closed()).map_err(|e| MorphismError::InvalidCurve(e.to_string()))
}

/// Projects both curves from the candidate pole farthest from them.
pub fn project_pair_to_r3(
    c1: &Polyline,
    c2: &Polyline,
) -> Result<([f64; 4], Polyline, Polyline), MorphismError> {
    let pole = choose_pole(&[c1, c2]);
    Ok((pole, project_to_r3(c1, pole)?, project_to_r3(c2, pole)?))
}

/// Deterministic candidate poles on `S^3` (Hopf-coordinate lattice); returns
/// the one maximizing the minimum distance to all curve vertices.
fn choose_pole(curves: &[&Polyline]) -> [f64; 4] {
    let mut best = ([0.0, 0.0, 0.0, 1.0], -1.0);
    let n_eta = 7;
    let n_xi = 12;
    for i in 0..n_eta {
        let eta = (i as f64 + 0.5) / n_eta as f64 * PI / 2.0;
        for j in 0..n_xi {
            for k in 0..n_xi {
                let a = 2.0 * PI * (j as f64 + 0.25) / n_xi as f64;
                let b = 2.0 * PI * (k as f64 + 0.75) / n_xi as f64;
                let cand = [eta.cos() * a.cos(), eta.cos() * a.sin(), eta.sin() * b.cos(), eta.sin() * b.sin()];
                let d = curves
                    .iter()
                    .flat_map(|c| c.points())
                    .map(|x| dist(x, &cand))
                    .fold(f64::INFINITY, f64::min);
                if d > best.1 {
                    best = (cand, d);
                }
            }
        }
    }
    best.0
}

/// Orthonormal basis of the complement of the unit vector `pole`, ordered so
/// that `(pole, e1, e2, e3)` is positively oriented.
fn complement_frame(pole: [f64; 4]) -> [[f64; 4]; 3] {
    let mut basis: Vec<[f64; 4]> = vec![pole];
    for k in 0..4 {
        if basis.len() == 4 {
            break;
        }
        let mut v = [0.0; 4];
        v[k] = 1.0;
        for b in &basis {
            let c: f64 = (0..4).map(|i| v[i] * b[i]).sum();
            for i in 0..4 {
                v[i] -= c * b[i];
            }
        }
        let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if l > 1e-6 {
            basis.push(v.map(|x| x / l));
        }
    }
    let m = nalgebra::Matrix4::from_fn(|i, j| basis[j][i]);
    if m.determinant() < 0.0 {
        basis[3] = basis[3].map(|x| -x);
    }
    [basis[1], basis[2], basis[3]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::Cx;
    use crate::morphisms::Fiber;
    use std::f64::consts::TAU;

    fn circle(center: V3, u: V3, v: V3, r: f64, n: usize) -> Polyline {
        Polyline::sample(3, n, true, |t| {
            let (c, s) = ((TAU * t).cos(), (TAU * t).sin());
            (0..3).map(|k| center[k] + r * (c * u[k] + s * v[k])).collect()
        })
        .unwrap()
    }

    const VIEW: V3 = [0.31, 0.17, 0.93];

    #[test]
    fn hopf_link_circles() {
        let a = circle([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 512);
        let b = circle([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0, 512);
        let g = gauss_linking(&a, &b).unwrap();
        assert!((g.abs() - 1.0).abs() < 1e-3, "{g}");
        let x = crossing_linking_number(&a, &b, VIEW).unwrap();
        assert_eq!(x as f64, g.round());
        let g_rev = gauss_linking(&a, &b.reversed()).unwrap();
        assert!((g + g_rev).abs() < 1e-9);
    }

    #[test]
    fn unlinked_circles() {
        let a = circle([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 512);
        let b = circle([0.0, 0.0, 5.0], [1.0, 0.0, 0.0], [0.0, 0.6, 0.8], 1.0, 512);
        assert!(gauss_linking(&a, &b).unwrap().abs() < 1e-6);
        assert_eq!(crossing_linking_number(&a, &b, VIEW).unwrap(), 0);
    }

    #[test]
    fn too_close() {
        let a = circle([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 64);
        let b = circle([0.0, 0.0, 1e-4], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, 64);
        assert!(matches!(gauss_linking(&a, &b), Err(MorphismError::CurvesTooClose { .. })));
    }

    #[test]
    fn hopf_fibers_link_once() {
        let f1 = Fiber::over(1, 1, Cx::new(0.5, 0.2)).unwrap().to_polyline(512).unwrap();
        let f2 = Fiber::over(1, 1, Cx::new(-1.5, 0.7)).unwrap().to_polyline(512).unwrap();
        let (_, a, b) = project_pair_to_r3(&f1, &f2).unwrap();
        let g = gauss_linking(&a, &b).unwrap();
        assert!((g.abs() - 1.0).abs() < 0.05, "{g}");
        assert_eq!(crossing_linking_number(&a, &b, VIEW).unwrap() as f64, g.round());
    }

    #[test]
    fn frame_is_oriented() {
        let pole = [0.5, -0.5, 0.5, 0.5];
        let f = complement_frame(pole);
        let m = nalgebra::Matrix4::from_fn(|i, j| if j == 0 { pole[i] } else { f[j - 1][i] });
        assert!((m.determinant() - 1.0).abs() < 1e-12);
    }
}
