//! Fibers of the Seifert fibration `[z1^p : z2^q]` of the unit three-sphere.

use std::f64::consts::TAU;

use crate::branch::{dist, principal_arg, Cx, Polyline};

use super::maps::{gcd, SPHERE_TOL};
use super::MorphismError;

/// Moduli below this count as zero when classifying fibers.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    Regular,
    /// The core `{z2 = 0}`.
    SingularZ2,
    /// The core `{z1 = 0}`.
    SingularZ1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    p: u32,
    q: u32,
    z1: Cx,
    z2: Cx,
    kind: FiberKind,
}

impl Fiber {
    /// The fiber through a point of the unit sphere; singular fibers allowed.
    pub fn through(p: u32, q: u32, z1: Cx, z2: Cx) -> Result<Self, MorphismError> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(MorphismError::NotCoprime { p, q });
        }
        let r = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        if (r - 1.0).abs() > SPHERE_TOL {
            return Err(MorphismError::NotOnSphere { radius: r });
        }
        let kind = if z2.norm() < SINGULAR_TOL {
            FiberKind::SingularZ2
        } else if z1.norm() < SINGULAR_TOL {
            FiberKind::SingularZ1
        } else {
            FiberKind::Regular
        };
        Ok(Fiber { p, q, z1, z2, kind })
    }

    /// The singular fiber `{z2 = 0}`.
    pub fn core_z2(p: u32, q: u32) -> Result<Self, MorphismError> {
        Fiber::through(p, q, Cx::new(1.0, 0.0), Cx::new(0.0, 0.0))
    }

    /// The singular fiber `{z1 = 0}`.
    pub fn core_z1(p: u32, q: u32) -> Result<Self, MorphismError> {
        Fiber::through(p, q, Cx::new(0.0, 0.0), Cx::new(1.0, 0.0))
    }

    /// The regular fiber over the chart point `zc = z1^p / z2^q` of `S^2`.
    pub fn over(p: u32, q: u32, zc: Cx) -> Result<Self, MorphismError> {
        if !zc.re.is_finite() || !zc.im.is_finite() {
            return Err(MorphismError::ImageAtInfinity);
        }
        let m = zc.norm();
        if m < SINGULAR_TOL {
            return Err(MorphismError::SingularFiber);
        }
        // t1^p = m * t2^q with t1^2 + t2^2 = 1; the left side minus the right
        // side increases in t1.
        let g = |t1: f64| t1.powi(p as i32) - m * (1.0 - t1 * t1).max(0.0).sqrt().powi(q as i32);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        let t1 = 0.5 * (lo + hi);
        let t2 = (1.0 - t1 * t1).max(0.0).sqrt();
        let z1 = Cx::from_polar(t1, principal_arg(zc) / p as f64);
        let fiber = Fiber::through(p, q, z1, Cx::new(t2, 0.0))?;
        if fiber.kind != FiberKind::Regular {
            return Err(MorphismError::SingularFiber);
        }
        Ok(fiber)
    }

    /// Like [`Fiber::through`] but rejects singular fibers.
    pub fn regular_through(p: u32, q: u32, z1: Cx, z2: Cx) -> Result<Self, MorphismError> {
        let f = Fiber::through(p, q, z1, z2)?;
        if f.kind != FiberKind::Regular {
            return Err(MorphismError::SingularFiber);
        }
        Ok(f)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn kind(&self) -> FiberKind {
        self.kind
    }

    pub fn basepoint(&self) -> (Cx, Cx) {
        (self.z1, self.z2)
    }

    /// Radii `(|z1|, |z2|)` of the torus containing the fiber.
    pub fn torus_radii(&self) -> (f64, f64) {
        (self.z1.norm(), self.z2.norm())
    }

    /// Point at parameter `t in [0, 2 pi)`. Singular fibers are traversed once.
    pub fn at(&self, t: f64) -> (Cx, Cx) {
        match self.kind {
            FiberKind::Regular => (
                self.z1 * Cx::from_polar(1.0, self.q as f64 * t),
                self.z2 * Cx::from_polar(1.0, self.p as f64 * t),
            ),
            FiberKind::SingularZ2 => (self.z1 * Cx::from_polar(1.0, t), Cx::new(0.0, 0.0)),
            FiberKind::SingularZ1 => (Cx::new(0.0, 0.0), self.z2 * Cx::from_polar(1.0, t)),
        }
    }

    /// Closed polyline in `R^4` with `n` vertices.
    pub fn to_polyline(&self, n: usize) -> Result<Polyline, MorphismError> {
        Polyline::sample(4, n, true, |s| {
            let (a, b) = self.at(TAU * s);
            vec![a.re, a.im, b.re, b.im]
        })
        .map_err(|e| MorphismError::InvalidCurve(e.to_string()))
    }

    /// Number of turns of `arg z1` and `arg z2` over one period, counted from
    /// `n` samples by summing argument increments.
    pub fn winding_pair(&self, n: usize) -> (i64, i64) {
        let mut acc = (0.0, 0.0);
        let mut prev = self.at(0.0);
        for i in 1..=n {
            let cur = self.at(TAU * i as f64 / n as f64);
            if prev.0.norm() > 0.0 && cur.0.norm() > 0.0 {
                acc.0 += principal_arg(cur.0 / prev.0);
            }
            if prev.1.norm() > 0.0 && cur.1.norm() > 0.0 {
                acc.1 += principal_arg(cur.1 / prev.1);
            }
            prev = cur;
        }
        ((acc.0 / TAU).round() as i64, (acc.1 / TAU).round() as i64)
    }
}

/// Degree of the nearest-point projection of `fiber` onto the closed curve
/// `core`, counted as signed passages through the meridian half-disc at the
/// first vertex of `core`. Both curves are sampled with `n` vertices.
pub fn covering_degree(fiber: &Fiber, core: &Fiber, n: usize) -> Result<i64, MorphismError> {
    let curve = fiber.to_polyline(n)?;
    let core = core.to_polyline(n)?;
    covering_degree_polylines(&curve, &core, 0.3)
}

pub(crate) fn covering_degree_polylines(
    curve: &Polyline,
    core: &Polyline,
    tube: f64,
) -> Result<i64, MorphismError> {
    let m = core.segment_count() as f64;
    let mut params = Vec::with_capacity(curve.len());
    for x in curve.points() {
        let (s, d) = nearest_parameter(core, x);
        if d >= tube {
            return Err(MorphismError::NotInTube { distance: d });
        }
        params.push(s);
    }
    let mut crossings = 0i64;
    let count = params.len();
    let steps = if curve.is_closed() { count } else { count - 1 };
    for i in 0..steps {
        let a = params[i];
        let mut ds = params[(i + 1) % count] - a;
        if ds > m / 2.0 {
            ds -= m;
        } else if ds < -m / 2.0 {
            ds += m;
        }
        let b = a + ds;
        // Passages through integer multiples of m.
        crossings += (b / m).floor() as i64 - (a / m).floor() as i64;
    }
    Ok(crossings)
}

/// Parameter in `[0, segments)` of the nearest point of `core` and the distance.
fn nearest_parameter(core: &Polyline, x: &[f64]) -> (f64, f64) {
    let mut best = (0.0, f64::INFINITY);
    for (i, (a, b)) in core.segments().enumerate() {
        let mut ab2 = 0.0;
        let mut dot = 0.0;
        for k in 0..x.len() {
            let d = b[k] - a[k];
            ab2 += d * d;
            dot += (x[k] - a[k]) * d;
        }
        let t = (dot / ab2).clamp(0.0, 1.0);
        let p: Vec<f64> = (0..x.len()).map(|k| a[k] + t * (b[k] - a[k])).collect();
        let d = dist(x, &p);
        if d < best.1 {
            best = (i as f64 + t, d);
        }
    }
    best
}
