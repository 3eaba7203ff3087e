//! Complex arithmetic helpers, sampled paths and sign-consistent continuation
//! of half-integer powers along those paths.
//!
//! A Z2 harmonic object is only defined up to sign away from its branching
//! set. We pick the principal square root (argument in `(-pi, pi]`) as the
//! global reference and carry, along every path, the square root that varies
//! continuously together with a sign flag measured against that reference.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Complex number used throughout the crate.
pub type Cx = Complex64;

/// Proximity cutoff to the branching locus: `|h|` below this is "on Sigma".
pub const EPS_SIGMA: f64 = 1e-8;

/// Bases with modulus below this are treated as exactly zero.
pub const ZERO_BASE: f64 = 1e-300;

/// Maximum dyadic refinement depth per path segment (2^20 subdivisions).
pub const MAX_REFINE_DEPTH: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("half power of a zero base")]
    ZeroBase,
    #[error("path passes within {modulus:e} of the branching locus at {at:?}")]
    PathHitsBranchLocus { at: Vec<f64>, modulus: f64 },
    #[error("segment {segment} needs more than 2^20 subdivisions")]
    RefinementLimit { segment: usize },
    #[error("invalid polyline: {0}")]
    InvalidPolyline(String),
    #[error("start state does not match the path: {0}")]
    StartMismatch(String),
    #[error("non-finite value {0}")]
    NonFinite(String),
    #[error("monodromy needs a closed loop")]
    NotClosed,
}

/// A complex-valued function on a real domain whose square root is
/// continued along paths. Points are real coordinate slices; points of
/// `C^2` are laid out as `(Re z, Im z, Re w, Im w)`.
pub trait BranchFunction: Sync {
    fn domain_dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Cx;
}

impl<F: BranchFunction + ?Sized> BranchFunction for &F {
    fn domain_dim(&self) -> usize {
        (**self).domain_dim()
    }
    fn value(&self, x: &[f64]) -> Cx {
        (**self).value(x)
    }
}

pub(crate) fn ensure_finite(v: Cx, what: &str) -> Result<Cx, BranchError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(BranchError::NonFinite(format!("{what} = {v}")))
    }
}

/// Principal square root with argument convention `(-pi, pi]`.
///
/// A negative real input with a negative-zero imaginary part is treated as
/// lying on the positive side of the cut, so `sqrt(-1) = i` regardless of the
/// sign of zero.
pub fn principal_sqrt(v: Cx) -> Cx {
    let r = v.norm();
    if r == 0.0 {
        return Cx::new(0.0, 0.0);
    }
    let t = ((v.re.abs() + r) * 0.5).sqrt();
    if v.re >= 0.0 {
        Cx::new(t, v.im / (2.0 * t))
    } else {
        let im = if v.im < 0.0 { -t } else { t };
        Cx::new(v.im.abs() / (2.0 * t), im)
    }
}

/// Argument in `(-pi, pi]`, treating `-0.0` imaginary parts as `+0.0`.
pub fn principal_arg(v: Cx) -> f64 {
    let im = if v.im == 0.0 { 0.0 } else { v.im };
    let a = im.atan2(v.re);
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Exponent `(2k + 1) / 2` of a half-integer power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfPower(pub u32);

impl HalfPower {
    pub const SQRT: HalfPower = HalfPower(0);
    pub const THREE_HALVES: HalfPower = HalfPower(1);

    pub fn k(self) -> u32 {
        self.0
    }

    pub fn exponent(self) -> f64 {
        (2 * self.0 + 1) as f64 / 2.0
    }
}

impl Default for HalfPower {
    fn default() -> Self {
        HalfPower::THREE_HALVES
    }
}

/// `v^((2k+1)/2)` on the principal branch.
pub fn principal_half_power(v: Cx, k: HalfPower) -> Result<Cx, BranchError> {
    ensure_finite(v, "base")?;
    if v.norm() < ZERO_BASE {
        return Err(BranchError::ZeroBase);
    }
    Ok(principal_sqrt(v) * v.powu(k.0))
}

/// Continued half-power: `sqrt * h^k`, where `sqrt` is any square root of `h`.
pub fn half_power_from_sqrt(sqrt: Cx, h: Cx, k: HalfPower) -> Cx {
    sqrt * h.powu(k.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i32(v: i32) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Ordered list of points in R^n (n = 2, 3 or 4). A closed polyline stores
/// its first point once; the closing segment is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    dim: usize,
    coords: Vec<f64>,
    closed: bool,
}

impl Polyline {
    pub fn new(dim: usize, points: Vec<Vec<f64>>, closed: bool) -> Result<Self, BranchError> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(BranchError::InvalidPolyline(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, closed)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, closed: bool) -> Result<Self, BranchError> {
        if !(2..=4).contains(&dim) {
            return Err(BranchError::InvalidPolyline(format!("dimension {dim} not in 2..=4")));
        }
        if coords.len() % dim != 0 {
            return Err(BranchError::InvalidPolyline("ragged coordinate buffer".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(BranchError::InvalidPolyline("non-finite coordinate".into()));
        }
        let line = Polyline { dim, coords, closed };
        let n = line.len();
        if n < 2 {
            return Err(BranchError::InvalidPolyline("fewer than 2 points".into()));
        }
        for i in 1..n {
            if line.point(i) == line.point(i - 1) {
                return Err(BranchError::InvalidPolyline(format!(
                    "points {} and {i} coincide",
                    i - 1
                )));
            }
        }
        if closed && line.point(0) == line.point(n - 1) {
            return Err(BranchError::InvalidPolyline(
                "closed polyline repeats its first point".into(),
            ));
        }
        Ok(line)
    }

    /// Samples `f` at `n` equally spaced parameters in `[0, 1)` (closed) or
    /// `[0, 1]` (open).
    pub fn sample<F>(dim: usize, n: usize, closed: bool, f: F) -> Result<Self, BranchError>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let denom = if closed { n as f64 } else { (n.max(2) - 1) as f64 };
        let pts = (0..n).map(|i| f(i as f64 / denom)).collect();
        Self::new(dim, pts, closed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.len()
        } else {
            self.len() - 1
        }
    }

    /// Segments `(start, end)`, including the closing segment of a loop.
    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        let n = self.len();
        (0..self.segment_count()).map(move |i| (self.point(i), self.point((i + 1) % n)))
    }

    pub fn reversed(&self) -> Polyline {
        let mut pts: Vec<&[f64]> = self.points().collect();
        if self.closed {
            // keep the basepoint first
            pts[1..].reverse();
        } else {
            pts.reverse();
        }
        let coords = pts.concat();
        Polyline { dim: self.dim, coords, closed: self.closed }
    }

    /// Inserts `factor - 1` evenly spaced points inside every segment.
    pub fn refined(&self, factor: usize) -> Polyline {
        let factor = factor.max(1);
        let mut coords = Vec::with_capacity(self.coords.len() * factor);
        for (a, b) in self.segments() {
            for s in 0..factor {
                let t = s as f64 / factor as f64;
                coords.extend(a.iter().zip(b).map(|(x, y)| x + t * (y - x)));
            }
        }
        if !self.closed {
            coords.extend_from_slice(self.point(self.len() - 1));
        }
        Polyline { dim: self.dim, coords, closed: self.closed }
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).sum()
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Continuation record: the current point, the value of `h` there, the
/// continued square root and its sign against the principal root.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub at: Vec<f64>,
    pub h_value: Cx,
    pub sqrt_value: Cx,
    pub sign: Sign,
}

impl BranchState {
    /// State on the principal branch at `at`.
    pub fn principal<H: BranchFunction + ?Sized>(h: &H, at: &[f64]) -> Result<Self, BranchError> {
        Self::with_sign(h, at, Sign::Plus)
    }

    pub fn with_sign<H: BranchFunction + ?Sized>(
        h: &H,
        at: &[f64],
        sign: Sign,
    ) -> Result<Self, BranchError> {
        if at.len() != h.domain_dim() {
            return Err(BranchError::StartMismatch(format!(
                "point has {} coordinates, function expects {}",
                at.len(),
                h.domain_dim()
            )));
        }
        let v = ensure_finite(h.value(at), "h")?;
        if v.norm() < EPS_SIGMA {
            return Err(BranchError::PathHitsBranchLocus { at: at.to_vec(), modulus: v.norm() });
        }
        Ok(BranchState {
            at: at.to_vec(),
            h_value: v,
            sqrt_value: principal_sqrt(v) * sign.value(),
            sign,
        })
    }

    /// Builds a state from an explicit root choice; the sign is derived.
    pub fn from_root(at: Vec<f64>, h_value: Cx, sqrt_value: Cx) -> Self {
        let p = principal_sqrt(h_value);
        let sign = if (sqrt_value - p).norm() <= (sqrt_value + p).norm() {
            Sign::Plus
        } else {
            Sign::Minus
        };
        BranchState { at, h_value, sqrt_value, sign }
    }

    /// `|sqrt^2 - h| / |h|`.
    pub fn square_defect(&self) -> f64 {
        (self.sqrt_value * self.sqrt_value - self.h_value).norm() / self.h_value.norm()
    }
}

/// Continues `start` along `path`, choosing at every step the square root
/// nearest to the previous one. Steps across which the argument of `h`
/// changes by `pi/2` or more (summed over the two half steps) are bisected
/// until admissible.
pub fn continue_branch<H: BranchFunction + ?Sized>(
    h: &H,
    path: &Polyline,
    start: &BranchState,
) -> Result<BranchState, BranchError> {
    if path.dim() != h.domain_dim() {
        return Err(BranchError::StartMismatch(format!(
            "path dimension {} but function expects {}",
            path.dim(),
            h.domain_dim()
        )));
    }
    if dist(&start.at, path.point(0)) > 1e-12 * (1.0 + norm(path.point(0))) {
        return Err(BranchError::StartMismatch("start point is not the first path point".into()));
    }
    if start.square_defect() > 1e-10 {
        return Err(BranchError::StartMismatch("start sqrt does not square to h".into()));
    }
    let mut h_prev = ensure_finite(h.value(path.point(0)), "h")?;
    check_modulus(h_prev, path.point(0))?;
    let mut root = nearest_root(h_prev, start.sqrt_value);

    let mut x = vec![0.0; path.dim()];
    let mut mid = vec![0.0; path.dim()];
    for (seg, (a, b)) in path.segments().enumerate() {
        let mut t = 0.0_f64;
        let mut depth = 0u32;
        while t < 1.0 {
            let dt = 0.5_f64.powi(depth as i32);
            let t_next = (t + dt).min(1.0);
            lerp(a, b, t_next, &mut x);
            let h_next = ensure_finite(h.value(&x), "h")?;
            check_modulus(h_next, &x)?;
            // The midpoint guards against a full turn hiding between samples.
            lerp(a, b, 0.5 * (t + t_next), &mut mid);
            let h_mid = ensure_finite(h.value(&mid), "h")?;
            check_modulus(h_mid, &mid)?;
            let darg = principal_arg(h_mid / h_prev).abs() + principal_arg(h_next / h_mid).abs();
            if darg >= FRAC_PI_2 {
                depth += 1;
                if depth > MAX_REFINE_DEPTH {
                    return Err(BranchError::RefinementLimit { segment: seg });
                }
                continue;
            }
            root = nearest_root(h_next, root);
            h_prev = h_next;
            t = t_next;
            // coarsen again once we are back on a coarser dyadic grid point
            while depth > 0 && (t * f64::powi(2.0, depth as i32 - 1)).fract() == 0.0 {
                depth -= 1;
            }
        }
    }
    let end = if path.is_closed() { path.point(0) } else { path.point(path.len() - 1) };
    Ok(BranchState::from_root(end.to_vec(), h_prev, root))
}

/// Sign picked up by continuing the principal branch once around `lp`.
pub fn monodromy<H: BranchFunction + ?Sized>(h: &H, lp: &Polyline) -> Result<Sign, BranchError> {
    if !lp.is_closed() {
        return Err(BranchError::NotClosed);
    }
    let start = BranchState::principal(h, lp.point(0))?;
    let end = continue_branch(h, lp, &start)?;
    Ok(end.sign)
}

fn nearest_root(h: Cx, previous: Cx) -> Cx {
    let s = principal_sqrt(h);
    if (s - previous).norm() <= (s + previous).norm() {
        s
    } else {
        -s
    }
}

fn check_modulus(v: Cx, at: &[f64]) -> Result<(), BranchError> {
    if v.norm() < EPS_SIGMA {
        Err(BranchError::PathHitsBranchLocus { at: at.to_vec(), modulus: v.norm() })
    } else {
        Ok(())
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64, out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + t * (y - x);
    }
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Splits a point of `C^2` laid out as `(Re z, Im z, Re w, Im w)`.
pub fn as_c2(x: &[f64]) -> (Cx, Cx) {
    (Cx::new(x[0], x[1]), Cx::new(x[2], x[3]))
}

pub fn from_c2(z: Cx, w: Cx) -> Vec<f64> {
    vec![z.re, z.im, w.re, w.im]
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Planar<F: Fn(Cx) -> Cx + Sync>(F);
    impl<F: Fn(Cx) -> Cx + Sync> BranchFunction for Planar<F> {
        fn domain_dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> Cx {
            (self.0)(Cx::new(x[0], x[1]))
        }
    }

    struct C2<F: Fn(Cx, Cx) -> Cx + Sync>(F);
    impl<F: Fn(Cx, Cx) -> Cx + Sync> BranchFunction for C2<F> {
        fn domain_dim(&self) -> usize {
            4
        }
        fn value(&self, x: &[f64]) -> Cx {
            let (z, w) = as_c2(x);
            (self.0)(z, w)
        }
    }

    fn unit_circle(n: usize) -> Polyline {
        Polyline::sample(2, n, true, |t| {
            let a = 2.0 * PI * t;
            vec![a.cos(), a.sin()]
        })
        .unwrap()
    }

    #[test]
    fn half_power_examples() {
        let v = principal_half_power(Cx::new(4.0, 0.0), HalfPower(1)).unwrap();
        assert!((v - Cx::new(8.0, 0.0)).norm() < 1e-14);
        let v = principal_half_power(Cx::new(1.0, 0.0), HalfPower(0)).unwrap();
        assert!((v - Cx::new(1.0, 0.0)).norm() < 1e-15);
        let v = principal_half_power(Cx::new(-1.0, 0.0), HalfPower(1)).unwrap();
        assert!((v - Cx::new(0.0, -1.0)).norm() < 1e-15);
        // negative zero imaginary part stays on the principal side
        let v = principal_half_power(Cx::new(-1.0, -0.0), HalfPower(1)).unwrap();
        assert!((v - Cx::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn half_power_rejects_zero() {
        assert_eq!(principal_half_power(Cx::new(0.0, 0.0), HalfPower(1)), Err(BranchError::ZeroBase));
        assert!(matches!(
            principal_half_power(Cx::new(f64::NAN, 0.0), HalfPower(1)),
            Err(BranchError::NonFinite(_))
        ));
    }

    #[test]
    fn sqrt_monodromy_around_origin() {
        let h = Planar(|z| z);
        assert_eq!(monodromy(&h, &unit_circle(8)).unwrap(), Sign::Minus);
        let h2 = Planar(|z| z * z);
        assert_eq!(monodromy(&h2, &unit_circle(8)).unwrap(), Sign::Plus);
    }

    #[test]
    fn coarse_loop_gets_refined() {
        // three points: every step turns arg z by 2pi/3 and must be bisected
        let h = Planar(|z| z);
        assert_eq!(monodromy(&h, &unit_circle(3)).unwrap(), Sign::Minus);
        let h3 = Planar(|z| z * z * z);
        assert_eq!(monodromy(&h3, &unit_circle(3)).unwrap(), Sign::Minus);
    }

    #[test]
    fn product_meridian() {
        let h = C2(|z, w| z * w);
        let lp = Polyline::sample(4, 16, true, |t| {
            let a = 2.0 * PI * t;
            vec![a.cos(), a.sin(), 1.0, 0.0]
        })
        .unwrap();
        assert_eq!(monodromy(&h, &lp).unwrap(), Sign::Minus);
    }

    #[test]
    fn path_through_zero_is_rejected() {
        let h = Planar(|z| z);
        let path = Polyline::new(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let start = BranchState::principal(&h, &[-1.0, 0.0]).unwrap();
        assert!(matches!(
            continue_branch(&h, &path, &start),
            Err(BranchError::PathHitsBranchLocus { .. })
        ));
    }

    #[test]
    fn refinement_limit() {
        // arg jumps by pi across an interval of width 1e-12, too fine to resolve
        let h = Planar(|z| {
            let s = (z.re * 1e12).tanh();
            Cx::new(s.abs().max(0.5), 0.0) * Cx::from_polar(1.0, PI / 2.0 * s)
        });
        let path = Polyline::new(2, vec![vec![-1.0, 0.0], vec![1.0, 0.0]], false).unwrap();
        let start = BranchState::principal(&h, &[-1.0, 0.0]).unwrap();
        assert!(matches!(
            continue_branch(&h, &path, &start),
            Err(BranchError::RefinementLimit { segment: 0 })
        ));
    }

    #[test]
    fn reversal_returns_start() {
        let h = Planar(|z| z * (z - Cx::new(0.5, 0.2)));
        let path = Polyline::sample(2, 40, false, |t| {
            let a = 3.0 * PI * t;
            vec![1.3 * a.cos(), 1.1 * a.sin() + 0.1]
        })
        .unwrap();
        let start = BranchState::principal(&h, path.point(0)).unwrap();
        let mid = continue_branch(&h, &path, &start).unwrap();
        let back = continue_branch(&h, &path.reversed(), &mid).unwrap();
        assert!((back.sqrt_value - start.sqrt_value).norm() <= 1e-8 * start.sqrt_value.norm());
    }

    #[test]
    fn polyline_validation() {
        assert!(Polyline::new(2, vec![vec![0.0, 0.0]], false).is_err());
        assert!(Polyline::new(2, vec![vec![0.0, 0.0], vec![0.0, 0.0]], false).is_err());
        assert!(Polyline::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]], true).is_err());
        assert!(Polyline::new(5, vec![vec![0.0; 5], vec![1.0; 5]], false).is_err());
        let closed = unit_circle(6);
        assert_eq!(closed.segment_count(), 6);
        assert_eq!(closed.refined(2).len(), 12);
        assert_eq!(closed.reversed().point(0), closed.point(0));
    }
}
