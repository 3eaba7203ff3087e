//! Holomorphic defining functions with closed-form partial derivatives.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::branch::{as_c2, BranchFunction, Cx};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("line {0} has (a, b) = (0, 0)")]
    DegenerateLine(usize),
    #[error("non-finite coefficient at {0}")]
    NonFiniteCoefficient(String),
    #[error("polynomial is identically zero")]
    Zero,
}

/// `sum_i c_i z^i`, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePolynomial {
    coeffs: Vec<Cx>,
}

impl UnivariatePolynomial {
    pub fn new(mut coeffs: Vec<Cx>) -> Result<Self, PolyError> {
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(PolyError::NonFiniteCoefficient(format!("[{i}]")));
        }
        while coeffs.len() > 1 && coeffs.last() == Some(&Cx::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(PolyError::Zero);
        }
        Ok(UnivariatePolynomial { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, PolyError> {
        Self::new(coeffs.iter().map(|&c| Cx::new(c, 0.0)).collect())
    }

    /// `z - a`.
    pub fn linear_root(a: Cx) -> Self {
        UnivariatePolynomial { coeffs: vec![-a, Cx::new(1.0, 0.0)] }
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Cx) -> Cx {
        self.coeffs.iter().rev().fold(Cx::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> UnivariatePolynomial {
        if self.coeffs.len() == 1 {
            return UnivariatePolynomial { coeffs: vec![Cx::new(0.0, 0.0)] };
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        UnivariatePolynomial { coeffs }
    }

    pub fn eval_with_derivative(&self, z: Cx) -> (Cx, Cx) {
        let mut p = Cx::new(0.0, 0.0);
        let mut dp = Cx::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All complex roots (with repetition), from the eigenvalues of the
    /// companion matrix followed by a few Newton polishing steps.
    pub fn roots(&self) -> Vec<Cx> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[n];
        let mut companion = DMatrix::<Cx>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Cx::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let eig = companion.schur().eigenvalues().map(|e| e.iter().copied().collect::<Vec<_>>());
        let mut roots = eig.unwrap_or_default();
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        roots
    }

    /// Newton refinement; stops if a step would not reduce the residual
    /// (multiple roots converge slowly and are left as is).
    pub fn polish(&self, mut z: Cx) -> Cx {
        for _ in 0..8 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let next = z - p / dp;
            if self.eval(next).norm() >= p.norm() {
                break;
            }
            z = next;
        }
        z
    }

    /// Distinct roots with multiplicities; roots closer than `tol` are merged.
    pub fn roots_with_multiplicity(&self, tol: f64) -> Vec<(Cx, usize)> {
        let mut out: Vec<(Cx, usize, Cx)> = Vec::new();
        for r in self.roots() {
            if let Some(slot) = out.iter_mut().find(|(c, _, _)| (c - r).norm() < tol) {
                slot.1 += 1;
                slot.2 += r;
                slot.0 = slot.2 / slot.1 as f64;
            } else {
                out.push((r, 1, r));
            }
        }
        out.into_iter().map(|(c, m, _)| (c, m)).collect()
    }
}

/// `sum_{i,j} c[i][j] z^i w^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial {
    coeffs: Vec<Vec<Cx>>,
}

impl BivariatePolynomial {
    pub fn new(coeffs: Vec<Vec<Cx>>) -> Result<Self, PolyError> {
        for (i, row) in coeffs.iter().enumerate() {
            if let Some(j) = row.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
                return Err(PolyError::NonFiniteCoefficient(format!("[{i}][{j}]")));
            }
        }
        if coeffs.iter().flatten().all(|c| c.norm() == 0.0) {
            return Err(PolyError::Zero);
        }
        Ok(BivariatePolynomial { coeffs })
    }

    pub fn coeffs(&self) -> &[Vec<Cx>] {
        &self.coeffs
    }

    pub fn eval(&self, z: Cx, w: Cx) -> Cx {
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(0.0, 0.0), |acc, row| acc * z + horner(row, w))
    }

    /// `(h, dh/dz, dh/dw)`, differentiating the table term by term.
    pub fn eval_with_partials(&self, z: Cx, w: Cx) -> (Cx, Cx, Cx) {
        let zero = Cx::new(0.0, 0.0);
        let (mut h, mut hz, mut hw) = (zero, zero, zero);
        let mut zi = Cx::new(1.0, 0.0);
        let mut zi_1 = zero; // z^(i-1)
        for (i, row) in self.coeffs.iter().enumerate() {
            let (r, dr) = horner_with_derivative(row, w);
            h += zi * r;
            hw += zi * dr;
            if i > 0 {
                hz += zi_1 * r * i as f64;
            }
            zi_1 = zi;
            zi *= z;
        }
        (h, hz, hw)
    }

    /// The same polynomial with `z` and `w` exchanged.
    pub fn transposed(&self) -> BivariatePolynomial {
        let width = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let coeffs = (0..width)
            .map(|j| self.coeffs.iter().map(|row| row.get(j).copied().unwrap_or_default()).collect())
            .collect();
        BivariatePolynomial { coeffs }
    }

    /// Coefficients of `w -> h(z, w)` for fixed `z`.
    pub fn in_w(&self, z: Cx) -> Vec<Cx> {
        let width = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![Cx::new(0.0, 0.0); width];
        let mut zi = Cx::new(1.0, 0.0);
        for row in &self.coeffs {
            for (j, c) in row.iter().enumerate() {
                out[j] += c * zi;
            }
            zi *= z;
        }
        out
    }
}

fn horner(row: &[Cx], w: Cx) -> Cx {
    row.iter().rev().fold(Cx::new(0.0, 0.0), |acc, c| acc * w + c)
}

fn horner_with_derivative(row: &[Cx], w: Cx) -> (Cx, Cx) {
    let mut p = Cx::new(0.0, 0.0);
    let mut dp = Cx::new(0.0, 0.0);
    for c in row.iter().rev() {
        dp = dp * w + p;
        p = p * w + c;
    }
    (p, dp)
}

/// A holomorphic germ `h` whose zero set is the branching locus.
#[derive(Debug, Clone, PartialEq)]
pub enum DefiningFunction {
    /// `prod_j (a_j z + b_j w)`: complex lines through the origin.
    ProductOfLines(Vec<(Cx, Cx)>),
    /// `(z - b)(w - c) - a`.
    Node { a: Cx, b: Cx, c: Cx },
    /// `w^2 - a (z^3 + 1)`.
    RamifiedCover { a: Cx },
    Bivariate(BivariatePolynomial),
    /// A polynomial in one variable; its domain is the plane.
    Univariate(UnivariatePolynomial),
}

impl DefiningFunction {
    pub fn lines(lines: Vec<(Cx, Cx)>) -> Result<Self, PolyError> {
        if let Some(i) = lines.iter().position(|(a, b)| a.norm() == 0.0 && b.norm() == 0.0) {
            return Err(PolyError::DegenerateLine(i));
        }
        Ok(DefiningFunction::ProductOfLines(lines))
    }

    pub fn node(a: Cx, b: Cx, c: Cx) -> Self {
        DefiningFunction::Node { a, b, c }
    }

    pub fn ramified(a: Cx) -> Self {
        DefiningFunction::RamifiedCover { a }
    }

    /// Real dimension of the domain: 4 for `C^2`, 2 for the plane.
    pub fn dim(&self) -> usize {
        match self {
            DefiningFunction::Univariate(_) => 2,
            _ => 4,
        }
    }

    /// `(h, dh/dz, dh/dw)`; for a univariate polynomial `w` is ignored and
    /// `dh/dw = 0`.
    pub fn eval_with_partials(&self, z: Cx, w: Cx) -> (Cx, Cx, Cx) {
        let one = Cx::new(1.0, 0.0);
        let zero = Cx::new(0.0, 0.0);
        match self {
            DefiningFunction::ProductOfLines(lines) => {
                // product rule, accumulated left to right
                let (mut h, mut hz, mut hw) = (one, zero, zero);
                for (a, b) in lines {
                    let l = a * z + b * w;
                    hz = hz * l + h * a;
                    hw = hw * l + h * b;
                    h *= l;
                }
                (h, hz, hw)
            }
            DefiningFunction::Node { a, b, c } => {
                let (zb, wc) = (z - b, w - c);
                (zb * wc - a, wc, zb)
            }
            DefiningFunction::RamifiedCover { a } => {
                (w * w - a * (z * z * z + one), -a * z * z * 3.0, w * 2.0)
            }
            DefiningFunction::Bivariate(p) => p.eval_with_partials(z, w),
            DefiningFunction::Univariate(p) => {
                let (v, d) = p.eval_with_derivative(z);
                (v, d, zero)
            }
        }
    }

    pub fn eval(&self, z: Cx, w: Cx) -> Cx {
        self.eval_with_partials(z, w).0
    }

    /// Splits a real point into `(z, w)` according to `dim`.
    pub fn split(&self, x: &[f64]) -> (Cx, Cx) {
        if self.dim() == 2 {
            (Cx::new(x[0], x[1]), Cx::new(0.0, 0.0))
        } else {
            as_c2(x)
        }
    }

    /// Coefficient table of `h`, `None` for a univariate polynomial.
    pub fn to_bivariate(&self) -> Option<BivariatePolynomial> {
        let zero = Cx::new(0.0, 0.0);
        let one = Cx::new(1.0, 0.0);
        let table = match self {
            DefiningFunction::ProductOfLines(lines) => {
                let mut t = vec![vec![one]];
                for (a, b) in lines {
                    let n = t.len() + 1;
                    let mut next = vec![vec![zero; n]; n];
                    for (i, row) in t.iter().enumerate() {
                        for (j, c) in row.iter().enumerate() {
                            next[i + 1][j] += c * a;
                            next[i][j + 1] += c * b;
                        }
                    }
                    t = next;
                }
                t
            }
            DefiningFunction::Node { a, b, c } => vec![vec![b * c - a, -b], vec![-c, one]],
            DefiningFunction::RamifiedCover { a } => {
                vec![vec![-a, zero, one], vec![zero], vec![zero], vec![-a]]
            }
            DefiningFunction::Bivariate(p) => return Some(p.clone()),
            DefiningFunction::Univariate(_) => return None,
        };
        Some(BivariatePolynomial { coeffs: table })
    }

    /// Vanishing order of `h` at a generic point of its zero set, when known
    /// in closed form (1 for reduced catalogue kinds).
    pub fn homogeneous_degree(&self) -> Option<usize> {
        match self {
            DefiningFunction::ProductOfLines(l) => Some(l.len()),
            _ => None,
        }
    }
}

impl BranchFunction for DefiningFunction {
    fn domain_dim(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: &[f64]) -> Cx {
        let (z, w) = self.split(x);
        self.eval(z, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    /// Central differences in the complex direction: for holomorphic `h`,
    /// `dh/dz = (h(z + e) - h(z - e)) / 2e` with real `e`.
    fn fd_partials(h: &DefiningFunction, z: Cx, w: Cx) -> (Cx, Cx) {
        let e = 1e-6;
        let dz = (h.eval(z + e, w) - h.eval(z - e, w)) / (2.0 * e);
        let dw = (h.eval(z, w + e) - h.eval(z, w - e)) / (2.0 * e);
        (dz, dw)
    }

    #[test]
    fn partials_match_finite_differences() {
        let cases = vec![
            DefiningFunction::lines(vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.0), c(1.0, 0.0))]).unwrap(),
            DefiningFunction::node(c(0.3, -0.2), c(0.1, 0.0), c(0.0, 0.5)),
            DefiningFunction::ramified(c(1.5, 0.5)),
            DefiningFunction::Bivariate(
                BivariatePolynomial::new(vec![vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 1.0)]]).unwrap(),
            ),
        ];
        let (z, w) = (c(0.4, 0.7), c(-0.3, 0.2));
        for h in &cases {
            let (_, hz, hw) = h.eval_with_partials(z, w);
            let (fz, fw) = fd_partials(h, z, w);
            assert!((hz - fz).norm() < 1e-8, "{h:?}: {hz} vs {fz}");
            assert!((hw - fw).norm() < 1e-8, "{h:?}: {hw} vs {fw}");
        }
    }

    #[test]
    fn nodal_family_examples() {
        let h = DefiningFunction::node(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let (z, w) = (c(0.3, 0.1), c(-0.7, 0.4));
        assert!((h.eval(z, w) - z * w).norm() < 1e-15);
        let h1 = DefiningFunction::node(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(h1.eval(c(2.0, 0.0), c(0.5, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn degenerate_line_rejected() {
        assert_eq!(
            DefiningFunction::lines(vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(0.0, 0.0))]),
            Err(PolyError::DegenerateLine(1))
        );
    }

    #[test]
    fn univariate_roots_and_multiplicity() {
        // (z - 1)^2 (z + 2i)
        let p = UnivariatePolynomial::new(vec![c(0.0, 2.0), c(1.0, -4.0), c(-2.0, 2.0), c(1.0, 0.0)]).unwrap();
        let r = p.roots_with_multiplicity(1e-4);
        assert_eq!(r.len(), 2);
        let one = r.iter().find(|(z, _)| (z - c(1.0, 0.0)).norm() < 1e-5).unwrap();
        assert_eq!(one.1, 2);
        let other = r.iter().find(|(z, _)| (z - c(0.0, -2.0)).norm() < 1e-9).unwrap();
        assert_eq!(other.1, 1);
    }

    #[test]
    fn bivariate_in_w_matches_eval() {
        let p = BivariatePolynomial::new(vec![vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], vec![], vec![], vec![c(-1.0, 0.0)]]).unwrap();
        let z = c(0.2, 0.3);
        let q = UnivariatePolynomial::new(p.in_w(z)).unwrap();
        let w = c(0.7, -0.1);
        assert!((q.eval(w) - p.eval(z, w)).norm() < 1e-14);
    }

    #[test]
    fn tables_match_closed_forms() {
        let kinds = [
            DefiningFunction::lines(vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.5), c(-0.3, 1.0))]).unwrap(),
            DefiningFunction::node(c(1.0, 0.2), c(0.3, 0.0), c(-0.5, 1.0)),
            DefiningFunction::ramified(c(0.7, -0.4)),
        ];
        let (z, w) = (c(0.4, -0.9), c(1.3, 0.2));
        for h in &kinds {
            let t = h.to_bivariate().unwrap();
            assert!((t.eval(z, w) - h.eval(z, w)).norm() < 1e-13, "{h:?}");
            assert!((t.transposed().eval(w, z) - h.eval(z, w)).norm() < 1e-13);
        }
    }
}
