//! Evaluatable Z2 harmonic functions and 1-forms.
//!
//! Every construction tracks one complex function `g` (the one whose square
//! root is multivalued) and is evaluated from a [`BranchState`] for `g`:
//!
//! | construction | tracked `g` | potential `f` | form |
//! |---|---|---|---|
//! | `ReHPower { h, k }` | `h` | `Re h^((2k+1)/2)` | `df` |
//! | `PlanarSqrt { p }` | `p` | when `deg p <= 1` | `Re(p^(1/2) dz)` |
//! | `AxialProduct { k }` on R^3 | `w = x + iy` | `2 z Re w^((2k+1)/2)` | `df` |
//! | `QuadraticDifferentialSqrt { q }` | `q` | when `deg q <= 1` | `Re(q^(1/2) dz)` |
//! | `Pullback { map, base }` | `g_base o map` | `f_base o map` | `J^T w_base` |

use std::fmt;

use crate::branch::{
    ensure_finite, principal_sqrt, BranchFunction, BranchState, Cx, HalfPower, Sign, EPS_SIGMA,
};
use crate::morphisms::SmoothMap;

use super::poly::{DefiningFunction, UnivariatePolynomial};
use super::FormError;

/// Value of a real 1-form at a point, in the ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector(pub Vec<f64>);

impl Covector {
    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Covector {
        Covector(self.0.iter().map(|v| v * s).collect())
    }

    /// Real covector of `Re(a dz + b dw)` in `(Re z, Im z, Re w, Im w)`.
    pub fn from_holomorphic_c2(a: Cx, b: Cx) -> Covector {
        Covector(vec![a.re, -a.im, b.re, -b.im])
    }

    /// Real covector of `Re(a dz)` in `(Re z, Im z)`.
    pub fn from_holomorphic_c1(a: Cx) -> Covector {
        Covector(vec![a.re, -a.im])
    }
}

impl std::ops::Add for &Covector {
    type Output = Covector;
    fn add(self, rhs: &Covector) -> Covector {
        Covector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    ReHPower { h: DefiningFunction, k: HalfPower },
    PlanarSqrt { p: UnivariatePolynomial },
    AxialProduct { k: HalfPower },
    QuadraticDifferentialSqrt { q: UnivariatePolynomial },
    Pullback { map: SmoothMap, base: Box<Z2Form> },
}

/// Description of the branching set, i.e. where the twisting line bundle has
/// monodromy `-1`.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchingLocus {
    /// Zero set of `h` (branching along its odd-order components).
    ZeroSet(DefiningFunction),
    /// Odd-multiplicity zeros of a polynomial in the plane.
    Points(Vec<Cx>),
    /// The `z`-axis of R^3.
    ZAxis,
    /// Preimage of the base locus under a map.
    Preimage { map: SmoothMap, base: Box<BranchingLocus> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Z2Form {
    construction: Construction,
}

impl Z2Form {
    pub fn re_h_power(h: DefiningFunction, k: HalfPower) -> Self {
        Z2Form { construction: Construction::ReHPower { h, k } }
    }

    pub fn planar(p: UnivariatePolynomial) -> Self {
        Z2Form { construction: Construction::PlanarSqrt { p } }
    }

    pub fn axial(k: HalfPower) -> Self {
        Z2Form { construction: Construction::AxialProduct { k } }
    }

    pub fn quadratic_differential(q: UnivariatePolynomial) -> Self {
        Z2Form { construction: Construction::QuadraticDifferentialSqrt { q } }
    }

    pub fn pullback(map: SmoothMap, base: Z2Form) -> Result<Self, FormError> {
        if map.target_dim() != base.dim() {
            return Err(FormError::DimensionMismatch { expected: base.dim(), got: map.target_dim() });
        }
        Ok(Z2Form { construction: Construction::Pullback { map, base: Box::new(base) } })
    }

    pub fn construction(&self) -> &Construction {
        &self.construction
    }

    pub fn dim(&self) -> usize {
        match &self.construction {
            Construction::ReHPower { h, .. } => h.dim(),
            Construction::PlanarSqrt { .. } | Construction::QuadraticDifferentialSqrt { .. } => 2,
            Construction::AxialProduct { .. } => 3,
            Construction::Pullback { map, .. } => map.source_dim(),
        }
    }

    pub fn branching_locus(&self) -> BranchingLocus {
        match &self.construction {
            Construction::ReHPower { h, .. } => BranchingLocus::ZeroSet(h.clone()),
            Construction::PlanarSqrt { p: poly } | Construction::QuadraticDifferentialSqrt { q: poly } => {
                BranchingLocus::Points(
                    poly.roots_with_multiplicity(1e-6)
                        .into_iter()
                        .filter(|(_, m)| m % 2 == 1)
                        .map(|(r, _)| r)
                        .collect(),
                )
            }
            Construction::AxialProduct { .. } => BranchingLocus::ZAxis,
            Construction::Pullback { map, base } => {
                BranchingLocus::Preimage { map: map.clone(), base: Box::new(base.branching_locus()) }
            }
        }
    }

    /// Principal-branch state of the tracked function at `x`.
    pub fn principal_state(&self, x: &[f64]) -> Result<BranchState, FormError> {
        self.check_point(x)?;
        Ok(BranchState::principal(self, x)?)
    }

    pub fn state_with_sign(&self, x: &[f64], sign: Sign) -> Result<BranchState, FormError> {
        self.check_point(x)?;
        Ok(BranchState::with_sign(self, x, sign)?)
    }

    /// The potential `f` with `w = df`, continued to `state`.
    pub fn eval_f(&self, state: &BranchState) -> Result<f64, FormError> {
        let g = self.check_state(state)?;
        let s = state.sqrt_value;
        match &self.construction {
            Construction::ReHPower { k, .. } => Ok((s * g.powu(k.0)).re),
            Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => {
                linear_potential(p, s, g)
            }
            Construction::AxialProduct { k } => Ok(2.0 * state.at[2] * (s * g.powu(k.0)).re),
            Construction::Pullback { map, base } => {
                let inner = self.base_state(map, state)?;
                base.eval_f(&inner)
            }
        }
    }

    /// The 1-form at `state`.
    pub fn eval_omega(&self, state: &BranchState) -> Result<Covector, FormError> {
        let g = self.check_state(state)?;
        let s = state.sqrt_value;
        match &self.construction {
            Construction::ReHPower { h, k } => {
                let (z, w) = h.split(&state.at);
                let (_, hz, hw) = h.eval_with_partials(z, w);
                // d Re h^((2k+1)/2) = Re( (2k+1)/2 * h^((2k-1)/2) dh )
                let c = s * g.powu(k.0) / g * k.exponent();
                if h.dim() == 2 {
                    Ok(Covector::from_holomorphic_c1(c * hz))
                } else {
                    Ok(Covector::from_holomorphic_c2(c * hz, c * hw))
                }
            }
            Construction::PlanarSqrt { .. } | Construction::QuadraticDifferentialSqrt { .. } => {
                Ok(Covector::from_holomorphic_c1(s))
            }
            Construction::AxialProduct { k } => {
                Ok(axial_covector(state.at[2], g, s, *k))
            }
            Construction::Pullback { map, base } => {
                let inner = self.base_state(map, state)?;
                let wb = base.eval_omega(&inner)?;
                let jac = map.jacobian(&state.at)?;
                let v = jac.transpose() * nalgebra::DVector::from_column_slice(&wb.0);
                Ok(Covector(v.iter().copied().collect()))
            }
        }
    }

    /// `|w|` at `x`; independent of the branch.
    pub fn omega_norm_at(&self, x: &[f64]) -> Result<f64, FormError> {
        Ok(self.eval_omega(&self.principal_state(x)?)?.norm())
    }

    fn base_state(&self, map: &SmoothMap, state: &BranchState) -> Result<BranchState, FormError> {
        let y = map.eval(&state.at)?;
        Ok(BranchState {
            at: y,
            h_value: state.h_value,
            sqrt_value: state.sqrt_value,
            sign: state.sign,
        })
    }

    fn check_point(&self, x: &[f64]) -> Result<(), FormError> {
        if x.len() != self.dim() {
            return Err(FormError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(FormError::NonFinitePoint);
        }
        Ok(())
    }

    /// Validates `state` against the tracked function; returns `g(state.at)`.
    fn check_state(&self, state: &BranchState) -> Result<Cx, FormError> {
        self.check_point(&state.at)?;
        let g = self.tracked(&state.at)?;
        ensure_finite(g, "g")?;
        if g.norm() < EPS_SIGMA {
            return Err(FormError::OnBranchLocus { modulus: g.norm() });
        }
        let scale = g.norm();
        if (g - state.h_value).norm() > 1e-8 * scale || state.square_defect() > 1e-8 {
            return Err(FormError::StateMismatch);
        }
        Ok(g)
    }

    fn tracked(&self, x: &[f64]) -> Result<Cx, FormError> {
        Ok(match &self.construction {
            Construction::ReHPower { h, .. } => h.value(x),
            Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => {
                p.eval(Cx::new(x[0], x[1]))
            }
            Construction::AxialProduct { .. } => Cx::new(x[0], x[1]),
            Construction::Pullback { map, base } => base.tracked(&map.eval(x)?)?,
        })
    }
}

impl BranchFunction for Z2Form {
    fn domain_dim(&self) -> usize {
        self.dim()
    }

    /// Off the map's domain (e.g. at the pole of a chart) this is NaN, which
    /// continuation reports as a non-finite value.
    fn value(&self, x: &[f64]) -> Cx {
        self.tracked(x).unwrap_or(Cx::new(f64::NAN, f64::NAN))
    }
}

impl fmt::Display for Z2Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.construction {
            Construction::ReHPower { k, .. } => write!(f, "Re h^({}/2)", 2 * k.0 + 1),
            Construction::PlanarSqrt { .. } => f.write_str("Re(p^(1/2) dz)"),
            Construction::AxialProduct { k } => write!(f, "2 z Re w^({}/2)", 2 * k.0 + 1),
            Construction::QuadraticDifferentialSqrt { .. } => f.write_str("Re sqrt(q)"),
            Construction::Pullback { base, .. } => write!(f, "pullback of {base}"),
        }
    }
}

/// Potential of `Re(p^(1/2) dz)` when `p` has degree at most one.
fn linear_potential(p: &UnivariatePolynomial, s: Cx, g: Cx) -> Result<f64, FormError> {
    match p.coeffs() {
        [c0] => {
            let _ = c0;
            Err(FormError::NoPotential)
        }
        [_, c1] => Ok((s * g / c1 * (2.0 / 3.0)).re),
        _ => Err(FormError::NoPotential),
    }
}

fn axial_covector(z: f64, w: Cx, sqrt_w: Cx, k: HalfPower) -> Covector {
    let top = sqrt_w * w.powu(k.0);
    let lower = top / w;
    let m = (2 * k.0 + 1) as f64;
    Covector(vec![m * z * lower.re, -m * z * lower.im, 2.0 * top.re])
}

/// The R^3 form `2 Re(w^((2k+1)/2)) dz + (2k+1) z Re(w^((2k-1)/2) dw)` at
/// `(x, y, z)` with `w = x + iy`, on the principal branch times `sign`.
pub fn eval_r3_form(z: f64, w: Cx, sign: Sign) -> Result<Covector, FormError> {
    eval_r3_form_k(z, w, sign, HalfPower::THREE_HALVES)
}

pub fn eval_r3_form_k(z: f64, w: Cx, sign: Sign, k: HalfPower) -> Result<Covector, FormError> {
    ensure_finite(w, "w")?;
    if w.norm() < EPS_SIGMA {
        return Err(FormError::OnBranchLocus { modulus: w.norm() });
    }
    Ok(axial_covector(z, w, principal_sqrt(w) * sign.value(), k))
}

/// `Re(p^(1/2) dz)` at a state for `p`.
pub fn eval_planar(p: &UnivariatePolynomial, state: &BranchState) -> Result<Covector, FormError> {
    Z2Form::planar(p.clone()).eval_omega(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::from_c2;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn zw() -> Z2Form {
        Z2Form::re_h_power(DefiningFunction::node(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)), HalfPower(1))
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn eval_f_examples() {
        let f = zw();
        let at = |z: Cx, w: Cx| f.eval_f(&f.principal_state(&from_c2(z, w)).unwrap()).unwrap();
        assert!((at(c(1.0, 0.0), c(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!(at(c(0.0, 1.0), c(0.0, 1.0)).abs() < 1e-15);
        assert!((at(c(4.0, 0.0), c(1.0, 0.0)) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn eval_omega_examples() {
        let f = zw();
        let s = f.principal_state(&from_c2(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(close(&f.eval_omega(&s).unwrap().0, &[1.5, 0.0, 1.5, 0.0], 1e-15));
        let s = f.principal_state(&from_c2(c(4.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(close(&f.eval_omega(&s).unwrap().0, &[3.0, 0.0, 12.0, 0.0], 1e-14));
    }

    #[test]
    fn r3_form_examples() {
        let p = Sign::Plus;
        assert!(close(&eval_r3_form(0.0, c(1.0, 0.0), p).unwrap().0, &[0.0, 0.0, 2.0], 1e-15));
        assert!(close(&eval_r3_form(1.0, c(1.0, 0.0), p).unwrap().0, &[3.0, 0.0, 2.0], 1e-15));
        assert!(close(&eval_r3_form(1.0, c(-1.0, 0.0), p).unwrap().0, &[0.0, -3.0, 0.0], 1e-15));
        assert!(matches!(eval_r3_form(1.0, c(0.0, 0.0), p), Err(FormError::OnBranchLocus { .. })));
    }

    #[test]
    fn planar_examples() {
        let p = UnivariatePolynomial::linear_root(c(0.0, 0.0));
        let form = Z2Form::planar(p.clone());
        let s = form.principal_state(&[1.0, 0.0]).unwrap();
        assert!(close(&eval_planar(&p, &s).unwrap().0, &[1.0, 0.0], 1e-15));
        let s = form.principal_state(&[-1.0, 0.0]).unwrap();
        assert!(close(&eval_planar(&p, &s).unwrap().0, &[0.0, -1.0], 1e-15));
        let a = c(0.7, -1.2);
        let pa = UnivariatePolynomial::linear_root(a);
        let fa = Z2Form::planar(pa.clone());
        let s = fa.principal_state(&[a.re + 4.0, a.im]).unwrap();
        assert!(close(&eval_planar(&pa, &s).unwrap().0, &[2.0, 0.0], 1e-14));
    }

    #[test]
    fn sign_flip_negates() {
        let f = zw();
        let x = from_c2(c(0.3, 0.8), c(-0.5, 0.1));
        let plus = f.state_with_sign(&x, Sign::Plus).unwrap();
        let minus = f.state_with_sign(&x, Sign::Minus).unwrap();
        assert_eq!(f.eval_f(&plus).unwrap(), -f.eval_f(&minus).unwrap());
        let a = f.eval_omega(&plus).unwrap();
        let b = f.eval_omega(&minus).unwrap();
        assert!(close(&a.0, &b.scaled(-1.0).0, 0.0));
    }

    #[test]
    fn stale_state_rejected() {
        let f = zw();
        let mut s = f.principal_state(&from_c2(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        s.at[0] = 2.0;
        assert_eq!(f.eval_f(&s), Err(FormError::StateMismatch));
    }

    #[test]
    fn identity_pullback_of_planar() {
        let base = Z2Form::planar(UnivariatePolynomial::linear_root(c(0.0, 0.0)));
        let form = Z2Form::pullback(SmoothMap::Identity { dim: 2 }, base).unwrap();
        let s = form.principal_state(&[1.0, 0.0]).unwrap();
        assert!(close(&form.eval_omega(&s).unwrap().0, &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn planar_linear_potential_matches_omega() {
        let form = Z2Form::planar(UnivariatePolynomial::linear_root(c(0.2, 0.1)));
        let x = [1.1, -0.7];
        let s = form.principal_state(&x).unwrap();
        let w = form.eval_omega(&s).unwrap();
        let h = 1e-5;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fp = form.eval_f(&form.principal_state(&xp).unwrap()).unwrap();
            let fm = form.eval_f(&form.principal_state(&xm).unwrap()).unwrap();
            assert!(((fp - fm) / (2.0 * h) - w.0[i]).abs() < 1e-8);
        }
    }
}
