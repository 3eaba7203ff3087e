//! The explicit families: germs `h` with `Re h^((2k+1)/2)`, planar forms
//! `Re(p^(1/2) dz)`, the axial form on R^3, square roots of quadratic
//! differentials and pullbacks by smooth maps.

mod form;
mod poly;
mod sigma;

use thiserror::Error;

use crate::branch::{BranchError, Cx, HalfPower};
use crate::morphisms::MorphismError;

pub use form::{eval_planar, eval_r3_form, eval_r3_form_k, BranchingLocus, Construction, Covector, Z2Form};
pub use poly::{BivariatePolynomial, DefiningFunction, PolyError, UnivariatePolynomial};
pub use sigma::{hausdorff, lines_on_sphere, sample_sigma, PointCloud, Window, SIGMA_RESIDUAL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("point lies on the branching locus (|g| = {modulus:e})")]
    OnBranchLocus { modulus: f64 },
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point has non-finite coordinates")]
    NonFinitePoint,
    #[error("branch state does not belong to this form at its point")]
    StateMismatch,
    #[error("this form has no single-valued potential")]
    NoPotential,
    #[error("no points of the zero set in the window")]
    EmptyIntersection,
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `Re ((z - b)(w - c) - a)^(3/2)`.
pub fn family_nodal(a: Cx, b: Cx, c: Cx) -> Z2Form {
    Z2Form::re_h_power(DefiningFunction::node(a, b, c), HalfPower::THREE_HALVES)
}

/// `Re (w^2 - a (z^3 + 1))^(3/2)`.
pub fn family_ramified(a: Cx) -> Z2Form {
    Z2Form::re_h_power(DefiningFunction::ramified(a), HalfPower::THREE_HALVES)
}

/// `Re (prod_j (a_j z + b_j w))^(3/2)`.
pub fn family_lines(lines: Vec<(Cx, Cx)>) -> Result<Z2Form, FormError> {
    Ok(Z2Form::re_h_power(DefiningFunction::lines(lines)?, HalfPower::THREE_HALVES))
}

/// `Re((z - a)^(1/2) dz)`.
pub fn family_planar(a: Cx) -> Z2Form {
    Z2Form::planar(UnivariatePolynomial::linear_root(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{as_c2, from_c2, monodromy, BranchFunction, Polyline, Sign};

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn nodal_examples() {
        let f = family_nodal(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let x = from_c2(c(0.3, 0.1), c(-0.2, 0.5));
        let (z, w) = as_c2(&x);
        assert_eq!(f.value(&x), z * w);
        let g = family_nodal(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(g.value(&from_c2(c(2.0, 0.0), c(0.5, 0.0))), c(0.0, 0.0));
        // Meridian of {z = 1}.
        let h = family_nodal(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let lp = Polyline::sample(4, 64, true, |t| {
            let z = c(1.0, 0.0) + Cx::from_polar(0.2, std::f64::consts::TAU * t);
            from_c2(z, c(1.0, 0.0))
        })
        .unwrap();
        assert_eq!(monodromy(&h, &lp).unwrap(), Sign::Minus);
    }

    #[test]
    fn degenerate_line_rejected() {
        assert!(matches!(
            family_lines(vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(0.0, 0.0))]),
            Err(FormError::Poly(PolyError::DegenerateLine(1)))
        ));
    }
}
