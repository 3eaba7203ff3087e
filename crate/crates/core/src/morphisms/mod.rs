//! Harmonic morphisms, Seifert fibers, linking numbers and Laplace–Beltrami
//! residuals in charts.

mod fiber;
mod laplace;
mod linking;
mod maps;

use thiserror::Error;

use crate::branch::{BranchState, Cx, EPS_SIGMA};
use crate::catalogue::{Covector, FormError, Z2Form};

pub use fiber::{covering_degree, Fiber, FiberKind};
pub use laplace::{
    homogeneous_extension_laplacian, laplace_beltrami_residual, MetricChart, ScalarField,
};
pub use linking::{crossing_linking_number, gauss_linking, project_pair_to_r3, project_to_r3};
pub use maps::{hopf, inverse_stereographic, SmoothMap, SPHERE_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorphismError {
    #[error("p = {p} and q = {q} must be coprime positive integers")]
    NotCoprime { p: u32, q: u32 },
    #[error("map undefined at this point")]
    DegenerateInput,
    #[error("image is the point at infinity of the chart")]
    ImageAtInfinity,
    #[error("image lies on the branching locus (|g| = {modulus:e})")]
    ImageOnBranchLocus { modulus: f64 },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point not on the unit sphere (radius {radius})")]
    NotOnSphere { radius: f64 },
    #[error("fiber meets a singular fiber")]
    SingularFiber,
    #[error("curves too close (distance {distance:e})")]
    CurvesTooClose { distance: f64 },
    #[error("curve leaves the tube around the core (distance {distance})")]
    NotInTube { distance: f64 },
    #[error("stencil leaves the chart interior")]
    ChartBoundary,
    #[error("metric not positive definite at {at:?}")]
    MetricNotPositive { at: Vec<f64> },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

/// `J^T` applied to the base covector at the image of `state.at`.
///
/// `state` tracks `g_base o map` at the source point; the base state shares
/// its square root.
pub fn pullback(map: &SmoothMap, base: &Z2Form, state: &BranchState) -> Result<Covector, MorphismError> {
    let form = Z2Form::pullback(map.clone(), base.clone()).map_err(|e| match e {
        FormError::DimensionMismatch { expected, got } => MorphismError::DimensionMismatch { expected, got },
        _ => MorphismError::DegenerateInput,
    })?;
    form.eval_omega(state).map_err(|e| match e {
        FormError::OnBranchLocus { modulus } => MorphismError::ImageOnBranchLocus { modulus },
        FormError::Morphism(m) => m,
        FormError::DimensionMismatch { expected, got } => MorphismError::DimensionMismatch { expected, got },
        _ => MorphismError::DegenerateInput,
    })
}

/// Checks that the image of `x` avoids the branching locus of `base`.
pub fn image_clear_of_locus(map: &SmoothMap, base: &Z2Form, x: &[f64]) -> Result<Cx, MorphismError> {
    use crate::branch::BranchFunction;
    let y = map.eval(x)?;
    let g = base.value(&y);
    if !(g.norm() >= EPS_SIGMA) {
        return Err(MorphismError::ImageOnBranchLocus { modulus: g.norm() });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{continue_branch, monodromy, Polyline, Sign};
    use crate::catalogue::UnivariatePolynomial;

    fn planar_z() -> Z2Form {
        Z2Form::planar(UnivariatePolynomial::linear_root(Cx::new(0.0, 0.0)))
    }

    #[test]
    fn identity_pullback() {
        let map = SmoothMap::Identity { dim: 2 };
        let form = Z2Form::pullback(map.clone(), planar_z()).unwrap();
        let s = form.principal_state(&[1.0, 0.0]).unwrap();
        let w = pullback(&map, &planar_z(), &s).unwrap();
        assert!((w.0[0] - 1.0).abs() < 1e-15 && w.0[1].abs() < 1e-15);
    }

    #[test]
    fn hopf_pullback_jacobian_two_ways() {
        let map = SmoothMap::hopf_chart();
        let base = planar_z();
        let form = Z2Form::pullback(map.clone(), base.clone()).unwrap();
        let x = [0.5, 0.3, 0.6, -0.2];
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.iter().map(|v| v / r).collect();
        let s = form.principal_state(&x).unwrap();
        let closed = pullback(&map, &base, &s).unwrap();
        // Same covector with an FD Jacobian.
        let y = map.eval(&x).unwrap();
        let bs = base.principal_state(&y).unwrap();
        let bs = if (bs.sqrt_value - s.sqrt_value).norm() < 1e-12 { bs } else { base.state_with_sign(&y, bs.sign.flip()).unwrap() };
        let wb = base.eval_omega(&bs).unwrap();
        let h = 1e-6;
        let mut fd = vec![0.0; 4];
        for j in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let yp = map.eval(&xp).unwrap();
            let ym = map.eval(&xm).unwrap();
            for i in 0..2 {
                fd[j] += (yp[i] - ym[i]) / (2.0 * h) * wb.0[i];
            }
        }
        let fd = Covector(fd);
        assert!((fd.norm() - closed.norm()).abs() < 1e-6 * closed.norm());
    }

    #[test]
    fn pulled_back_meridian_flips() {
        // Loop around {z = 0} in S^3: pulls back the twist of sqrt(Z) at Z = 0.
        let form = Z2Form::pullback(SmoothMap::hopf_chart(), planar_z()).unwrap();
        let eps: f64 = 0.3;
        let lp = Polyline::sample(4, 256, true, |t| {
            let a = 2.0 * std::f64::consts::PI * t;
            vec![eps * a.cos(), eps * a.sin(), (1.0 - eps * eps).sqrt(), 0.0]
        })
        .unwrap();
        assert_eq!(monodromy(&form, &lp).unwrap(), Sign::Minus);
        // Along a Hopf fiber the pulled-back function is constant.
        let fib = Polyline::sample(4, 256, true, |t| {
            let a = 2.0 * std::f64::consts::PI * t;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            vec![s * a.cos(), s * a.sin(), s * a.cos(), s * a.sin()]
        })
        .unwrap();
        let start = form.principal_state(fib.point(0)).unwrap();
        let end = continue_branch(&form, &fib, &start).unwrap();
        assert_eq!(end.sign, Sign::Plus);
    }

    #[test]
    fn image_at_infinity_reported() {
        let map = SmoothMap::hopf_chart();
        assert_eq!(map.eval(&[1.0, 0.0, 0.0, 0.0]).err(), Some(MorphismError::ImageAtInfinity));
        assert!(matches!(
            image_clear_of_locus(&map, &planar_z(), &[0.0, 0.0, 1.0, 0.0]),
            Err(MorphismError::ImageOnBranchLocus { .. })
        ));
    }
}
