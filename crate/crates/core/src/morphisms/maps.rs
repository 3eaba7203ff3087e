//! Smooth maps with closed-form Jacobians: the Hopf map, the Seifert maps
//! `[z1^p : z2^q]` and the stereographic chart of the two-sphere.
//!
//! Points of `S^2` live in `R (+) C = R^3` as `(x0, Re xi, Im xi)`. The
//! stereographic chart projects from the north pole `(1, 0, 0)`, so the
//! south pole is `0 in C` and `Z = xi / (1 - x0)`. With this convention the
//! Hopf map composed with the chart is `(z, w) -> z / w`.

use nalgebra::DMatrix;

use crate::branch::Cx;

use super::MorphismError;

/// Tolerance for "on the unit sphere".
pub const SPHERE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothMap {
    Identity { dim: usize },
    /// `(z, w) -> (|z|^2 - |w|^2, 2 z conj(w))`, `R^4 -> R^3`.
    Hopf,
    /// `(z1, z2) -> [z1^p : z2^q]` as a point of `S^2`, `R^4 -> R^3`.
    Seifert { p: u32, q: u32 },
    /// `S^2 \ {north} -> C`, `R^3 -> R^2`.
    Stereographic,
    /// Applied left to right.
    Composite(Vec<SmoothMap>),
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SmoothMap {
    pub fn seifert(p: u32, q: u32) -> Result<Self, MorphismError> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(MorphismError::NotCoprime { p, q });
        }
        Ok(SmoothMap::Seifert { p, q })
    }

    /// The Hopf map followed by the stereographic chart: `(z, w) -> z / w`.
    pub fn hopf_chart() -> Self {
        SmoothMap::Composite(vec![SmoothMap::Hopf, SmoothMap::Stereographic])
    }

    pub fn seifert_chart(p: u32, q: u32) -> Result<Self, MorphismError> {
        Ok(SmoothMap::Composite(vec![SmoothMap::seifert(p, q)?, SmoothMap::Stereographic]))
    }

    pub fn source_dim(&self) -> usize {
        match self {
            SmoothMap::Identity { dim } => *dim,
            SmoothMap::Hopf | SmoothMap::Seifert { .. } => 4,
            SmoothMap::Stereographic => 3,
            SmoothMap::Composite(maps) => maps.first().map_or(0, SmoothMap::source_dim),
        }
    }

    pub fn target_dim(&self) -> usize {
        match self {
            SmoothMap::Identity { dim } => *dim,
            SmoothMap::Hopf | SmoothMap::Seifert { .. } => 3,
            SmoothMap::Stereographic => 2,
            SmoothMap::Composite(maps) => maps.last().map_or(0, SmoothMap::target_dim),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, MorphismError> {
        self.check_input(x)?;
        match self {
            SmoothMap::Identity { .. } => Ok(x.to_vec()),
            SmoothMap::Hopf => {
                let (z, w) = (Cx::new(x[0], x[1]), Cx::new(x[2], x[3]));
                let xi = z * w.conj() * 2.0;
                Ok(vec![z.norm_sqr() - w.norm_sqr(), xi.re, xi.im])
            }
            SmoothMap::Seifert { p, q } => {
                let (a, b) = seifert_ab(x, *p, *q);
                let d = a.norm_sqr() + b.norm_sqr();
                if d == 0.0 {
                    return Err(MorphismError::DegenerateInput);
                }
                let xi = a * b.conj() * 2.0 / d;
                Ok(vec![(a.norm_sqr() - b.norm_sqr()) / d, xi.re, xi.im])
            }
            SmoothMap::Stereographic => {
                let den = 1.0 - x[0];
                if den.abs() < 1e-12 {
                    return Err(MorphismError::ImageAtInfinity);
                }
                Ok(vec![x[1] / den, x[2] / den])
            }
            SmoothMap::Composite(maps) => {
                let mut y = x.to_vec();
                for m in maps {
                    y = m.eval(&y)?;
                }
                Ok(y)
            }
        }
    }

    /// Jacobian, `target_dim x source_dim`.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, MorphismError> {
        self.check_input(x)?;
        match self {
            SmoothMap::Identity { dim } => Ok(DMatrix::identity(*dim, *dim)),
            SmoothMap::Hopf => {
                let (x1, y1, x2, y2) = (x[0], x[1], x[2], x[3]);
                Ok(DMatrix::from_row_slice(
                    3,
                    4,
                    &[
                        2.0 * x1, 2.0 * y1, -2.0 * x2, -2.0 * y2, //
                        2.0 * x2, 2.0 * y2, 2.0 * x1, 2.0 * y1, //
                        -2.0 * y2, 2.0 * x2, 2.0 * y1, -2.0 * x1,
                    ],
                ))
            }
            SmoothMap::Seifert { p, q } => seifert_jacobian(x, *p, *q),
            SmoothMap::Stereographic => {
                let den = 1.0 - x[0];
                if den.abs() < 1e-12 {
                    return Err(MorphismError::ImageAtInfinity);
                }
                let xi = Cx::new(x[1], x[2]);
                let d0 = xi / (den * den);
                Ok(DMatrix::from_row_slice(
                    2,
                    3,
                    &[d0.re, 1.0 / den, 0.0, d0.im, 0.0, 1.0 / den],
                ))
            }
            SmoothMap::Composite(maps) => {
                let mut y = x.to_vec();
                let mut jac = DMatrix::identity(x.len(), x.len());
                for m in maps {
                    jac = m.jacobian(&y)? * jac;
                    y = m.eval(&y)?;
                }
                Ok(jac)
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<(), MorphismError> {
        if x.len() != self.source_dim() {
            return Err(MorphismError::DimensionMismatch { expected: self.source_dim(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(MorphismError::DegenerateInput);
        }
        Ok(())
    }
}

fn seifert_ab(x: &[f64], p: u32, q: u32) -> (Cx, Cx) {
    (Cx::new(x[0], x[1]).powu(p), Cx::new(x[2], x[3]).powu(q))
}

/// Rows `(x0, Re xi, Im xi)`, columns `(x1, y1, x2, y2)`, from Wirtinger
/// derivatives: for a real function `F`, `dF/dx = 2 Re F_z`,
/// `dF/dy = -2 Im F_z`; for complex `G`, `dG/dx = G_z + G_zbar`,
/// `dG/dy = i (G_z - G_zbar)`.
fn seifert_jacobian(x: &[f64], p: u32, q: u32) -> Result<DMatrix<f64>, MorphismError> {
    let (z1, z2) = (Cx::new(x[0], x[1]), Cx::new(x[2], x[3]));
    let a = z1.powu(p);
    let b = z2.powu(q);
    let da = z1.powu(p - 1) * p as f64;
    let db = z2.powu(q - 1) * q as f64;
    let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
    let d = aa + bb;
    if d == 0.0 {
        return Err(MorphismError::DegenerateInput);
    }
    let d2 = d * d;
    let x0_z1 = a.conj() * da * (2.0 * bb / d2);
    let x0_z2 = -b.conj() * db * (2.0 * aa / d2);
    let xi_z1 = da * b.conj() * (2.0 * bb / d2);
    let xi_z1b = -(a * a * b.conj() * da.conj()) * (2.0 / d2);
    let xi_z2 = -(a * b.conj() * b.conj() * db) * (2.0 / d2);
    let xi_z2b = a * db.conj() * (2.0 * aa / d2);
    let i = Cx::new(0.0, 1.0);
    let xi_x1 = xi_z1 + xi_z1b;
    let xi_y1 = i * (xi_z1 - xi_z1b);
    let xi_x2 = xi_z2 + xi_z2b;
    let xi_y2 = i * (xi_z2 - xi_z2b);
    Ok(DMatrix::from_row_slice(
        3,
        4,
        &[
            2.0 * x0_z1.re, -2.0 * x0_z1.im, 2.0 * x0_z2.re, -2.0 * x0_z2.im, //
            xi_x1.re, xi_y1.re, xi_x2.re, xi_y2.re, //
            xi_x1.im, xi_y1.im, xi_x2.im, xi_y2.im,
        ],
    ))
}

/// The Hopf map on the unit sphere.
pub fn hopf(z: Cx, w: Cx) -> Result<[f64; 3], MorphismError> {
    let r2 = z.norm_sqr() + w.norm_sqr();
    if (r2.sqrt() - 1.0).abs() > SPHERE_TOL {
        return Err(MorphismError::NotOnSphere { radius: r2.sqrt() });
    }
    let xi = z * w.conj() * 2.0;
    Ok([z.norm_sqr() - w.norm_sqr(), xi.re, xi.im])
}

/// Inverse of the stereographic chart, `C -> S^2`.
pub fn inverse_stereographic(zc: Cx) -> [f64; 3] {
    let r2 = zc.norm_sqr();
    let den = r2 + 1.0;
    [(r2 - 1.0) / den, 2.0 * zc.re / den, 2.0 * zc.im / den]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(m: &SmoothMap, x: &[f64]) -> DMatrix<f64> {
        let h = 1e-6;
        let n = x.len();
        let mut jac = DMatrix::zeros(m.target_dim(), n);
        for j in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (m.eval(&xp).unwrap(), m.eval(&xm).unwrap());
            for i in 0..m.target_dim() {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    #[test]
    fn hopf_examples() {
        let one = Cx::new(1.0, 0.0);
        let zero = Cx::new(0.0, 0.0);
        assert_eq!(hopf(one, zero).unwrap(), [1.0, 0.0, 0.0]);
        assert_eq!(hopf(zero, one).unwrap(), [-1.0, 0.0, 0.0]);
        let s = Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = hopf(s, s).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!(matches!(hopf(one, one), Err(MorphismError::NotOnSphere { .. })));
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let x = [0.3, -0.5, 0.6, 0.2];
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.iter().map(|v| v / n).collect();
        let maps = vec![
            SmoothMap::Hopf,
            SmoothMap::seifert(2, 3).unwrap(),
            SmoothMap::seifert(3, 2).unwrap(),
            SmoothMap::hopf_chart(),
            SmoothMap::seifert_chart(2, 3).unwrap(),
        ];
        for m in &maps {
            let a = m.jacobian(&x).unwrap();
            let b = fd_jacobian(m, &x);
            assert!((&a - &b).amax() < 1e-7, "{m:?}\n{a}\n{b}");
        }
    }

    #[test]
    fn hopf_chart_is_z_over_w() {
        let (z, w) = (Cx::new(0.6, 0.0), Cx::new(0.0, 0.8));
        let y = SmoothMap::hopf_chart().eval(&[z.re, z.im, w.re, w.im]).unwrap();
        let q = z / w;
        assert!((y[0] - q.re).abs() < 1e-14 && (y[1] - q.im).abs() < 1e-14);
    }

    #[test]
    fn seifert_one_one_is_hopf_on_sphere() {
        let x = [0.5, 0.5, 0.5, -0.5];
        let a = SmoothMap::Hopf.eval(&x).unwrap();
        let b = SmoothMap::Seifert { p: 1, q: 1 }.eval(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn coprimality_enforced() {
        assert!(matches!(SmoothMap::seifert(2, 4), Err(MorphismError::NotCoprime { .. })));
        assert!(SmoothMap::seifert(2, 3).is_ok());
    }

    #[test]
    fn stereographic_round_trip_and_pole() {
        let zc = Cx::new(0.3, -1.7);
        let s = inverse_stereographic(zc);
        let back = SmoothMap::Stereographic.eval(&s).unwrap();
        assert!((back[0] - zc.re).abs() < 1e-14 && (back[1] - zc.im).abs() < 1e-14);
        assert_eq!(SmoothMap::Stereographic.eval(&[1.0, 0.0, 0.0]), Err(MorphismError::ImageAtInfinity));
    }
}
