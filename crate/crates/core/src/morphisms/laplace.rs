//! Laplace–Beltrami residuals in explicit charts.
//!
//! `Delta u = (1/sqrt g) d_i (sqrt g g^{ij} d_j u)` is discretized with
//! nested central differences: fluxes at half steps, each flux built from
//! half-step differences of `u`. The scheme is second order for any smooth
//! metric.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use crate::branch::Cx;

use super::maps::inverse_stereographic;
use super::MorphismError;

/// A function on the manifold, evaluated at ambient points.
pub trait ScalarField: Sync {
    fn eval(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScalarField for F {
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricChart {
    /// Round unit `S^2` in the stereographic coordinate `(X, Y)`.
    StereographicS2,
    /// Round unit `S^3` in Hopf coordinates `(eta, xi1, xi2)` with
    /// `(z, w) = (cos eta e^{i xi1}, sin eta e^{i xi2})`.
    HopfS3Round,
    /// `S^3` with the restriction of `p^2 |dz1|^2 + q^2 |dz2|^2`, same coordinates.
    HopfS3Ellipsoid { p: u32, q: u32 },
}

impl MetricChart {
    pub fn dim(&self) -> usize {
        match self {
            MetricChart::StereographicS2 => 2,
            MetricChart::HopfS3Round | MetricChart::HopfS3Ellipsoid { .. } => 3,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    /// Whether `u` lies in the open parameter box.
    pub fn contains(&self, u: &[f64]) -> bool {
        if u.len() != self.dim() || u.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            MetricChart::StereographicS2 => true,
            _ => u[0] > 0.0 && u[0] < FRAC_PI_2,
        }
    }

    /// Ambient point of the manifold at parameters `u`.
    pub fn point(&self, u: &[f64]) -> Vec<f64> {
        match self {
            MetricChart::StereographicS2 => inverse_stereographic(Cx::new(u[0], u[1])).to_vec(),
            _ => {
                let (c, s) = (u[0].cos(), u[0].sin());
                vec![c * u[1].cos(), c * u[1].sin(), s * u[2].cos(), s * u[2].sin()]
            }
        }
    }

    /// Hopf-coordinate parameters of a point of `S^3` off both singular circles.
    pub fn hopf_parameters(x: &[f64]) -> Vec<f64> {
        let z = Cx::new(x[0], x[1]);
        let w = Cx::new(x[2], x[3]);
        vec![w.norm().atan2(z.norm()), z.arg(), w.arg()]
    }

    pub fn metric(&self, u: &[f64]) -> DMatrix<f64> {
        match *self {
            MetricChart::StereographicS2 => {
                let c = 4.0 / (1.0 + u[0] * u[0] + u[1] * u[1]).powi(2);
                DMatrix::from_diagonal_element(2, 2, c)
            }
            MetricChart::HopfS3Round => {
                let (c, s) = (u[0].cos(), u[0].sin());
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, c * c, s * s]))
            }
            MetricChart::HopfS3Ellipsoid { p, q } => {
                let (c, s) = (u[0].cos(), u[0].sin());
                let (p2, q2) = ((p * p) as f64, (q * q) as f64);
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                    p2 * s * s + q2 * c * c,
                    p2 * c * c,
                    q2 * s * s,
                ]))
            }
        }
    }

    /// Cholesky check of the metric at `u`.
    pub fn check_positive(&self, u: &[f64]) -> Result<(), MorphismError> {
        if !self.contains(u) || nalgebra::Cholesky::new(self.metric(u)).is_none() {
            return Err(MorphismError::MetricNotPositive { at: u.to_vec() });
        }
        Ok(())
    }
}

/// Second-order FD Laplace–Beltrami of `field` at chart parameters `u`.
pub fn laplace_beltrami_residual<F: ScalarField + ?Sized>(
    chart: &MetricChart,
    field: &F,
    u: &[f64],
    step: f64,
) -> Result<f64, MorphismError> {
    let n = chart.dim();
    if u.len() != n {
        return Err(MorphismError::DimensionMismatch { expected: n, got: u.len() });
    }
    let h = step;
    for i in 0..n {
        for sgn in [-1.0, 1.0] {
            let mut v = u.to_vec();
            v[i] += sgn * h;
            if !chart.contains(&v) {
                return Err(MorphismError::ChartBoundary);
            }
        }
    }
    chart.check_positive(u)?;
    let f = |v: &[f64]| field.eval(&chart.point(v));
    let shifted = |base: &[f64], moves: &[(usize, f64)]| {
        let mut v = base.to_vec();
        for &(k, d) in moves {
            v[k] += d;
        }
        v
    };
    // Flux sqrt(g) g^{ij} d_j u at a point, with d_j u from half-step
    // central differences.
    let flux = |x: &[f64], i: usize| -> f64 {
        let g = chart.metric(x);
        let sqrt_det = g.determinant().sqrt();
        let inv = g.try_inverse().expect("metric checked positive");
        let mut acc = 0.0;
        for j in 0..n {
            let gij = inv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let dj = (f(&shifted(x, &[(j, h / 2.0)])) - f(&shifted(x, &[(j, -h / 2.0)]))) / h;
            acc += gij * dj;
        }
        sqrt_det * acc
    };
    let mut div = 0.0;
    for i in 0..n {
        let plus = flux(&shifted(u, &[(i, h / 2.0)]), i);
        let minus = flux(&shifted(u, &[(i, -h / 2.0)]), i);
        div += (plus - minus) / h;
    }
    Ok(div / chart.metric(u).determinant().sqrt())
}

/// Laplacian on the unit `S^3` through the degree-0 homogeneous extension
/// `u(x / |x|)` and the 9-point Laplacian of R^4 at a point of the sphere.
pub fn homogeneous_extension_laplacian<F: ScalarField + ?Sized>(
    field: &F,
    x: &[f64],
    step: f64,
) -> Result<f64, MorphismError> {
    if x.len() != 4 {
        return Err(MorphismError::DimensionMismatch { expected: 4, got: x.len() });
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (r - 1.0).abs() > 1e-10 {
        return Err(MorphismError::NotOnSphere { radius: r });
    }
    let ext = |y: &[f64]| {
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v: Vec<f64> = y.iter().map(|c| c / r).collect();
        field.eval(&v)
    };
    let c = ext(x);
    let mut acc = 0.0;
    for k in 0..4 {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[k] += step;
        m[k] -= step;
        acc += ext(&p) + ext(&m) - 2.0 * c;
    }
    Ok(acc / (step * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let one = |_: &[f64]| 1.0;
        for chart in [MetricChart::StereographicS2, MetricChart::HopfS3Round, MetricChart::HopfS3Ellipsoid { p: 2, q: 3 }] {
            let u: Vec<f64> = if chart.dim() == 2 { vec![0.3, -0.4] } else { vec![0.7, 0.2, 1.1] };
            assert!(laplace_beltrami_residual(&chart, &one, &u, 1e-3).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn s2_log_is_harmonic() {
        // Re log Z on S^2 in the stereographic chart, as an ambient function.
        let f = |x: &[f64]| {
            let z = Cx::new(x[1], x[2]) / (1.0 - x[0]);
            z.norm().ln()
        };
        let u = [0.8, 0.5];
        let r1 = laplace_beltrami_residual(&MetricChart::StereographicS2, &f, &u, 1e-2).unwrap();
        let r2 = laplace_beltrami_residual(&MetricChart::StereographicS2, &f, &u, 5e-3).unwrap();
        assert!(r1.abs() < 1e-3 && (r1 / r2 - 4.0).abs() < 0.3, "{r1} {r2}");
    }

    #[test]
    fn coordinate_eigenfunction_on_s3() {
        // Restrictions of linear functions are eigenfunctions with eigenvalue -3.
        let f = |x: &[f64]| x[0] + 2.0 * x[3];
        let u = [0.6, 0.4, -1.0];
        let x = MetricChart::HopfS3Round.point(&u);
        let lb = laplace_beltrami_residual(&MetricChart::HopfS3Round, &f, &u, 1e-4).unwrap();
        let ext = homogeneous_extension_laplacian(&f, &x, 1e-4).unwrap();
        let exact = -3.0 * f(&x);
        assert!((lb - exact).abs() < 1e-6 * exact.abs(), "{lb} {exact}");
        assert!((ext - exact).abs() < 1e-6 * exact.abs(), "{ext} {exact}");
    }

    #[test]
    fn chart_boundary_and_spd() {
        let f = |x: &[f64]| x[0];
        assert_eq!(
            laplace_beltrami_residual(&MetricChart::HopfS3Round, &f, &[1e-4, 0.0, 0.0], 1e-3),
            Err(MorphismError::ChartBoundary)
        );
        assert!(MetricChart::HopfS3Ellipsoid { p: 2, q: 3 }.check_positive(&[0.4, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn hopf_parameters_roundtrip() {
        let u = [0.5, 1.2, -2.0];
        let back = MetricChart::hopf_parameters(&MetricChart::HopfS3Round.point(&u));
        for k in 0..3 {
            assert!((back[k] - u[k]).abs() < 1e-14);
        }
    }
}
