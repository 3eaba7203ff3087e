//! Zonal harmonics `rho^k P_k(cos phi)` and their finite combinations.

use super::SunError;

/// Largest degree accepted by [`zonal`].
pub const MAX_DEGREE: u32 = 12;

/// `P_k(t)` by the three-term recurrence.
pub fn legendre(k: u32, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if k == 0 {
        return p0;
    }
    for n in 1..k {
        let n = n as f64;
        let p2 = ((2.0 * n + 1.0) * t * p1 - n * p0) / (n + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `rho^k P_k(x3 / rho)` at a point of R^3.
pub fn zonal(k: u32, x: [f64; 3]) -> Result<f64, SunError> {
    if k > MAX_DEGREE {
        return Err(SunError::DegreeTooLarge { k });
    }
    Ok(zonal_meridian(k, x[0].hypot(x[1]), x[2]))
}

/// The same in the meridian plane, `s = sqrt(x1^2 + x2^2)`.
pub(crate) fn zonal_meridian(k: u32, s: f64, x3: f64) -> f64 {
    let rho = s.hypot(x3);
    if rho == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    rho.powi(k as i32) * legendre(k, x3 / rho)
}

/// `sum_k c_k rho^k P_k(cos phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalPolynomial {
    terms: Vec<(u32, f64)>,
}

impl ZonalPolynomial {
    pub fn new(terms: Vec<(u32, f64)>) -> Result<Self, SunError> {
        if let Some(&(k, _)) = terms.iter().find(|(k, _)| *k > MAX_DEGREE) {
            return Err(SunError::DegreeTooLarge { k });
        }
        Ok(ZonalPolynomial { terms })
    }

    pub fn single(k: u32) -> Result<Self, SunError> {
        ZonalPolynomial::new(vec![(k, 1.0)])
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    /// Value in the meridian plane.
    pub fn eval(&self, s: f64, x3: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * zonal_meridian(k, s, x3)).sum()
    }

    /// `d p / d rho` by homogeneity: `k p_k / rho` termwise.
    pub fn radial_derivative(&self, s: f64, x3: f64) -> f64 {
        let rho = s.hypot(x3);
        self.terms
            .iter()
            .filter(|(k, _)| *k > 0)
            .map(|&(k, c)| c * k as f64 * zonal_meridian(k, s, x3) / rho)
            .sum()
    }

    /// `sum_k c_k (2(k+1)/rho) p_k`, the radial factor of `2 grad chi . grad p`
    /// plus the `2 chi'/rho` part of `Delta chi`, per unit `chi'`.
    pub(crate) fn source_weight(&self, s: f64, x3: f64) -> f64 {
        let rho = s.hypot(x3);
        self.terms
            .iter()
            .map(|&(k, c)| c * 2.0 * (k as f64 + 1.0) * zonal_meridian(k, s, x3) / rho)
            .sum()
    }
}
