//! Leading coefficients `A1+-` of `u = A1+ cos(theta/2) r^{1/2} +
//! A1- sin(theta/2) r^{1/2} + O(r^{3/2})` near the circle, and null
//! combinations of several of them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::grid::{ring_point, DoubleCoverGrid, GridField};
use super::SunError;

/// Samples per ring over `theta in [0, 4 pi)`.
pub const RING_SAMPLES: usize = 128;

/// Largest accepted relative residual of the ring fit.
pub const FIT_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeadingCoefficients {
    pub a_plus: f64,
    pub a_minus: f64,
    /// Relative residual of the least-squares fit.
    pub fit_residual: f64,
}

impl LeadingCoefficients {
    pub fn norm(&self) -> f64 {
        self.a_plus.hypot(self.a_minus)
    }
}

/// Ring radii `r`, log-spaced on `[lo, hi]`.
pub fn log_rings(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default rings for a grid: `sqrt(r) >= 2 h_zeta` up to `r = 0.1`.
pub fn default_rings(grid: &DoubleCoverGrid) -> Vec<f64> {
    let lo = (2.0 * grid.zeta_step()).powi(2);
    log_rings(lo, 0.1, 24)
}

/// `(1/2 pi) int_0^{4 pi} u cos(theta/2) dtheta` and the sine counterpart on
/// the ring of radius `r` (trapezoid rule, periodic).
pub fn ring_projections<F: Fn(f64, f64) -> Result<f64, SunError>>(u: &F, r: f64) -> Result<(f64, f64), SunError> {
    let n = RING_SAMPLES;
    let dt = 4.0 * PI / n as f64;
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..n {
        let theta = k as f64 * dt;
        let v = u(r, theta)?;
        c += v * (theta / 2.0).cos();
        s += v * (theta / 2.0).sin();
    }
    Ok((c * dt / (2.0 * PI), s * dt / (2.0 * PI)))
}

/// Root mean square of `u` over the ring of radius `r`.
pub fn ring_rms<F: Fn(f64, f64) -> Result<f64, SunError>>(u: &F, r: f64) -> Result<f64, SunError> {
    let n = RING_SAMPLES;
    let mut acc = 0.0;
    for k in 0..n {
        let v = u(r, 4.0 * PI * k as f64 / n as f64)?;
        acc += v * v;
    }
    Ok((acc / n as f64).sqrt())
}

/// Fits the ring projections against `r^{1/2}, r^{3/2}, r^{5/2}`; the
/// `r^{1/2}` coefficients are `A1+-`.
pub fn extract_a1_from<F: Fn(f64, f64) -> Result<f64, SunError>>(
    u: &F,
    radii: &[f64],
) -> Result<LeadingCoefficients, SunError> {
    if radii.len() < 4 {
        return Err(SunError::FitIllConditioned { residual: f64::INFINITY });
    }
    let mut pc = Vec::with_capacity(radii.len());
    let mut ps = Vec::with_capacity(radii.len());
    for &r in radii {
        let (c, s) = ring_projections(u, r)?;
        pc.push(c);
        ps.push(s);
    }
    let (a_plus, res_c, norm_c) = fit_half_powers(radii, &pc);
    let (a_minus, res_s, norm_s) = fit_half_powers(radii, &ps);
    let total = (norm_c * norm_c + norm_s * norm_s).sqrt();
    let fit_residual = if total == 0.0 { 0.0 } else { (res_c * res_c + res_s * res_s).sqrt() / total };
    if !(fit_residual <= FIT_TOLERANCE) {
        return Err(SunError::FitIllConditioned { residual: fit_residual });
    }
    Ok(LeadingCoefficients { a_plus, a_minus, fit_residual })
}

/// `A1+-` of a gridded field.
pub fn extract_a1(grid: &DoubleCoverGrid, u: &GridField, radii: &[f64]) -> Result<LeadingCoefficients, SunError> {
    let sample = |r: f64, theta: f64| {
        let (mu, nu) = ring_point(r, theta);
        grid.interpolate(u, mu, nu)
    };
    extract_a1_from(&sample, radii)
}

/// `A1+- = sqrt 2 (u_mu, u_nu)` at the circle, from grid differences. The
/// circle sits on the `mu = 0` node between the two middle `nu` cells.
pub fn a1_from_gradient(grid: &DoubleCoverGrid, u: &GridField) -> LeadingCoefficients {
    let i0 = grid.n_mu() / 2;
    let (j0, j1) = (grid.n_nu() / 2 - 1, grid.n_nu() / 2);
    let d_mu = |j: usize| (u.at(i0 + 1, j) - u.at(i0 - 1, j)) / (2.0 * grid.h_mu());
    let u_mu = 0.5 * (d_mu(j0) + d_mu(j1));
    let u_nu = (u.at(i0, j1) - u.at(i0, j0)) / grid.h_nu();
    LeadingCoefficients { a_plus: 2f64.sqrt() * u_mu, a_minus: 2f64.sqrt() * u_nu, fit_residual: 0.0 }
}

/// Least squares on `r^{1/2}, r^{3/2}, r^{5/2}`: leading coefficient,
/// residual norm and data norm.
fn fit_half_powers(radii: &[f64], data: &[f64]) -> (f64, f64, f64) {
    let n = radii.len();
    // Columns scaled by their value at the largest ring for conditioning.
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let a = DMatrix::from_fn(n, 3, |i, k| (radii[i] / rmax).powf(0.5 + k as f64));
    let b = DVector::from_column_slice(data);
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-14).expect("svd with both factors");
    let resid = (&a * &x - &b).norm();
    (x[0] / rmax.sqrt(), resid, b.norm())
}

/// Unit vector `c` minimizing `|sum_k c_k (A1+(k), A1-(k))|`: eigenvector of
/// `A^T A` for the smallest eigenvalue, first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullCombination {
    pub coefficients: Vec<f64>,
    /// `|A c|`.
    pub residual: f64,
}

pub fn null_combination(columns: &[(f64, f64)], tol: f64) -> Result<NullCombination, SunError> {
    let k = columns.len();
    if k < 3 {
        return Err(SunError::NoNullDirection { count: k });
    }
    let a = DMatrix::from_fn(2, k, |r, c| if r == 0 { columns[c].0 } else { columns[c].1 });
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let idx = (0..k).min_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])).unwrap_or(0);
    let mut c: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);
    if let Some(first) = c.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let residual = (&a * DVector::from_column_slice(&c)).norm();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    if residual > tol * scale {
        return Err(SunError::NoNullDirection { count: k });
    }
    Ok(NullCombination { coefficients: c, residual })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
