//! The axisymmetric branched double cover of R^3 along the unit circle, in
//! elliptic coordinates of the meridian half-plane.
//!
//! With `W = s + i x3 = cosh(eta)`, `eta = mu + i nu`, `nu in [-pi/2, pi/2]`:
//!
//! * `s = cosh mu cos nu`, `x3 = sinh mu sin nu`;
//! * `(mu, nu)` and `(-mu, -nu)` are the same point of R^3 on the two sheets,
//!   so the rectangle covers the cut half-plane twice and is smooth across
//!   the circle `eta = 0`;
//! * `zeta = sqrt(2) sinh(eta / 2)` satisfies `zeta^2 + 1 = W`, so
//!   `zeta = r^{1/2} e^{i theta/2}` with `r` the distance to the circle;
//! * the axisymmetric Laplacian is
//!   `Delta u = [ (1/cosh mu) d_mu(cosh mu u_mu) + (1/cos nu) d_nu(cos nu u_nu) ] / J`
//!   with `J = sinh^2 mu + sin^2 nu = |sinh eta|^2`.
//!
//! `mu` is discretized by nodes on `[-M, M]`, `M = acosh(truncation)`, and
//! `nu` by cell centers; the axis faces `nu = +-pi/2` carry zero flux. The
//! operator separates, so the solve is a generalized eigendecomposition in
//! `nu` followed by one tridiagonal solve in `mu` per mode.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::branch::{Cx, Sign};

use super::SunError;

/// Truncation at which `n` equals the number of `mu` intervals.
pub const REFERENCE_TRUNCATION: f64 = 20.0;

/// Largest relative residual accepted from the direct solve.
pub const SOLVER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterBoundary {
    /// `V = 0` on the outer spheroid.
    Dirichlet,
    /// Per-mode condition matching the solution that decays at infinity.
    Radiation,
}

#[derive(Debug)]
struct NuModes {
    lambda: Vec<f64>,
    /// Columns are the modes, orthonormal for the weight `cos nu`.
    phi: DMatrix<f64>,
    /// `phi^T diag(cos nu)`: coefficients of a grid column.
    proj: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct DoubleCoverGrid {
    n_mu: usize,
    n_nu: usize,
    truncation: f64,
    m: f64,
    h_mu: f64,
    h_nu: f64,
    boundary: OuterBoundary,
    modes: Arc<NuModes>,
    /// Log-derivatives of the decaying mode solutions at `mu = M`.
    radiation: Arc<Vec<f64>>,
}

/// Values at the grid points, `n_nu` rows by `n_mu + 1` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    values: DMatrix<f64>,
}

impl GridField {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Value at `mu` node `i`, `nu` cell `j`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[(j, i)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.amax()
    }

    pub fn scaled(&self, c: f64) -> GridField {
        GridField { values: &self.values * c }
    }

    pub fn axpy(&self, c: f64, other: &GridField) -> GridField {
        GridField { values: &self.values + &other.values * c }
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        GridField { values: &self.values - &other.values }
    }
}

impl DoubleCoverGrid {
    /// Grid with `n` cells in `nu` and `mu` spacing `2 acosh(20) / n`.
    pub fn new(n: usize, truncation: f64, boundary: OuterBoundary) -> Result<Self, SunError> {
        if n < 8 || n % 2 != 0 {
            return Err(SunError::InvalidGrid(format!("resolution {n} must be even and at least 8")));
        }
        if !(truncation.is_finite() && truncation > 1.5) {
            return Err(SunError::InvalidGrid(format!("truncation {truncation} must exceed 1.5")));
        }
        let m = truncation.acosh();
        let m_ref = REFERENCE_TRUNCATION.acosh();
        let half = ((n as f64 / 2.0) * m / m_ref).ceil() as usize;
        let n_mu = 2 * half.max(4);
        let h_mu = 2.0 * m / n_mu as f64;
        let n_nu = n;
        let h_nu = PI / n_nu as f64;
        let modes = Arc::new(nu_modes(n_nu, h_nu));
        let radiation = Arc::new(match boundary {
            OuterBoundary::Dirichlet => vec![],
            OuterBoundary::Radiation => modes.lambda.iter().map(|&l| decaying_log_derivative(l, m)).collect(),
        });
        Ok(DoubleCoverGrid { n_mu, n_nu, truncation, m, h_mu, h_nu, boundary, modes, radiation })
    }

    pub fn n_mu(&self) -> usize {
        self.n_mu
    }

    pub fn n_nu(&self) -> usize {
        self.n_nu
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn mu_max(&self) -> f64 {
        self.m
    }

    pub fn h_mu(&self) -> f64 {
        self.h_mu
    }

    pub fn h_nu(&self) -> f64 {
        self.h_nu
    }

    pub fn boundary(&self) -> OuterBoundary {
        self.boundary
    }

    /// Spacing of the `zeta` chart near the circle, `max(h_mu, h_nu) / sqrt 2`.
    pub fn zeta_step(&self) -> f64 {
        self.h_mu.max(self.h_nu) / 2f64.sqrt()
    }

    pub fn mu(&self, i: usize) -> f64 {
        -self.m + i as f64 * self.h_mu
    }

    pub fn nu(&self, j: usize) -> f64 {
        -FRAC_PI_2 + (j as f64 + 0.5) * self.h_nu
    }

    /// `(s, x3)` of a grid point.
    pub fn physical(&self, i: usize, j: usize) -> (f64, f64) {
        to_physical(self.mu(i), self.nu(j))
    }

    pub fn field<F: Fn(f64, f64) -> f64>(&self, f: F) -> GridField {
        GridField { values: DMatrix::from_fn(self.n_nu, self.n_mu + 1, |j, i| f(self.mu(i), self.nu(j))) }
    }

    pub fn zeros(&self) -> GridField {
        GridField { values: DMatrix::zeros(self.n_nu, self.n_mu + 1) }
    }

    /// Solves `Delta V = H` for `H` given at the grid points.
    pub fn solve_poisson(&self, h: &GridField) -> Result<GridField, SunError> {
        let rhs = GridField {
            values: DMatrix::from_fn(self.n_nu, self.n_mu + 1, |j, i| jacobian(self.mu(i), self.nu(j)) * h.values[(j, i)]),
        };
        self.solve_scaled(&rhs)
    }

    /// Solves `J Delta V = rhs`, i.e. the regular operator in brackets.
    pub fn solve_scaled(&self, rhs: &GridField) -> Result<GridField, SunError> {
        self.check_shape(rhs)?;
        if rhs.values.iter().any(|v| !v.is_finite()) {
            return Err(SunError::SolverDiverged { residual: f64::NAN });
        }
        let scale = rhs.max_abs();
        if scale == 0.0 {
            return Ok(self.zeros());
        }
        let coeffs = &self.modes.proj * &rhs.values;
        let mut solved = DMatrix::zeros(self.n_nu, self.n_mu + 1);
        let cols = self.n_mu + 1;
        let mut line = vec![0.0; cols];
        for m in 0..self.n_nu {
            for i in 0..cols {
                line[i] = coeffs[(m, i)];
            }
            let out = self.solve_mode(m, &line);
            for i in 0..cols {
                solved[(m, i)] = out[i];
            }
        }
        let values = &self.modes.phi * solved;
        let u = GridField { values };
        let residual = self.relative_residual(&u, rhs);
        if !(residual <= SOLVER_TOLERANCE) {
            return Err(SunError::SolverDiverged { residual });
        }
        Ok(u)
    }

    /// `max |L_h u - rhs| / max |rhs|` over the rows of the discrete system.
    pub fn relative_residual(&self, u: &GridField, rhs: &GridField) -> f64 {
        let lu = self.apply_operator(u);
        let scale = rhs.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 1..self.n_mu {
            for j in 0..self.n_nu {
                worst = worst.max((lu.values[(j, i)] - rhs.values[(j, i)]).abs());
            }
        }
        match self.boundary {
            OuterBoundary::Dirichlet => {
                for j in 0..self.n_nu {
                    worst = worst.max(u.values[(j, 0)].abs()).max(u.values[(j, self.n_mu)].abs());
                }
            }
            OuterBoundary::Radiation => {
                worst = worst.max(self.radiation_row_residual(u, rhs));
            }
        }
        worst / scale
    }

    /// The regular operator `(1/cosh mu) d(cosh mu d) + (1/cos nu) d(cos nu d)`
    /// at interior `mu` nodes (boundary columns are left at zero).
    pub fn apply_operator(&self, u: &GridField) -> GridField {
        let mut out = DMatrix::zeros(self.n_nu, self.n_mu + 1);
        let (hm2, hn2) = (self.h_mu * self.h_mu, self.h_nu * self.h_nu);
        for i in 1..self.n_mu {
            let mu = self.mu(i);
            let (cp, cm, c0) = ((mu + self.h_mu / 2.0).cosh(), (mu - self.h_mu / 2.0).cosh(), mu.cosh());
            for j in 0..self.n_nu {
                let v = u.values[(j, i)];
                let d_mu = (cp * (u.values[(j, i + 1)] - v) - cm * (v - u.values[(j, i - 1)])) / (hm2 * c0);
                let nu = self.nu(j);
                let fp = if j + 1 < self.n_nu { (nu + self.h_nu / 2.0).cos() } else { 0.0 };
                let fm = if j > 0 { (nu - self.h_nu / 2.0).cos() } else { 0.0 };
                let up = if j + 1 < self.n_nu { u.values[(j + 1, i)] } else { v };
                let um = if j > 0 { u.values[(j - 1, i)] } else { v };
                let d_nu = (fp * (up - v) - fm * (v - um)) / (hn2 * nu.cos());
                out[(j, i)] = d_mu + d_nu;
            }
        }
        GridField { values: out }
    }

    fn check_shape(&self, f: &GridField) -> Result<(), SunError> {
        if f.values.nrows() != self.n_nu || f.values.ncols() != self.n_mu + 1 {
            return Err(SunError::InvalidGrid("field does not match the grid".into()));
        }
        Ok(())
    }

    /// Tridiagonal solve of `d(cosh mu d f) - lambda cosh mu f = cosh mu g`.
    fn solve_mode(&self, m: usize, g: &[f64]) -> Vec<f64> {
        let lambda = self.modes.lambda[m];
        let n = self.n_mu;
        let h2 = self.h_mu * self.h_mu;
        let mut lower = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut upper = vec![0.0; n + 1];
        let mut rhs = vec![0.0; n + 1];
        for i in 0..=n {
            let mu = self.mu(i);
            let (cp, cm, c0) = ((mu + self.h_mu / 2.0).cosh(), (mu - self.h_mu / 2.0).cosh(), mu.cosh());
            lower[i] = cm / h2;
            upper[i] = cp / h2;
            diag[i] = -(cp + cm) / h2 - lambda * c0;
            rhs[i] = c0 * g[i];
        }
        match self.boundary {
            OuterBoundary::Dirichlet => {
                for i in [0, n] {
                    lower[i] = 0.0;
                    upper[i] = 0.0;
                    diag[i] = 1.0;
                    rhs[i] = 0.0;
                }
            }
            OuterBoundary::Radiation => {
                // Ghost values from f' = y f at mu = M and f' = -y f at -M.
                let y = self.radiation[m];
                let hy = 2.0 * self.h_mu * y;
                let (cp, cm) = ((self.m + self.h_mu / 2.0).cosh(), (self.m - self.h_mu / 2.0).cosh());
                lower[n] = (cp + cm) / h2;
                diag[n] = (-cp * (1.0 - hy) - cm) / h2 - lambda * self.m.cosh();
                upper[n] = 0.0;
                upper[0] = (cp + cm) / h2;
                diag[0] = (-cp * (1.0 - hy) - cm) / h2 - lambda * self.m.cosh();
                lower[0] = 0.0;
            }
        }
        thomas(&lower, &diag, &upper, &rhs)
    }

    /// Residual of the two outer rows of a radiation solve, mode by mode.
    fn radiation_row_residual(&self, u: &GridField, rhs: &GridField) -> f64 {
        let n = self.n_mu;
        let h2 = self.h_mu * self.h_mu;
        let (cp, cm) = ((self.m + self.h_mu / 2.0).cosh(), (self.m - self.h_mu / 2.0).cosh());
        let c0 = self.m.cosh();
        let pick = |col: usize| &self.modes.proj * u.values.column(col);
        let (u0, u1, un1, un) = (pick(0), pick(1), pick(n - 1), pick(n));
        let (g0, gn) = (&self.modes.proj * rhs.values.column(0), &self.modes.proj * rhs.values.column(n));
        let mut worst = 0.0_f64;
        for m in 0..self.n_nu {
            let y = self.radiation[m];
            let lambda = self.modes.lambda[m];
            let hy = 2.0 * self.h_mu * y;
            let diag = (-cp * (1.0 - hy) - cm) / h2 - lambda * c0;
            let off = (cp + cm) / h2;
            let r_top = off * un1[m] + diag * un[m] - c0 * gn[m];
            let r_bot = off * u1[m] + diag * u0[m] - c0 * g0[m];
            worst = worst.max(r_top.abs() / c0).max(r_bot.abs() / c0);
        }
        worst
    }

    /// Cubic Lagrange interpolation at `(mu, nu)`; `nu` is continued evenly
    /// across the axis faces.
    pub fn interpolate(&self, f: &GridField, mu: f64, nu: f64) -> Result<f64, SunError> {
        let x = (mu + self.m) / self.h_mu;
        let i = x.floor() as isize;
        if !(x.is_finite() && i >= 1 && (i as usize) + 2 <= self.n_mu) {
            return Err(SunError::OutsideGrid { mu, nu });
        }
        if !(nu.abs() <= FRAC_PI_2 + 1e-12) {
            return Err(SunError::OutsideGrid { mu, nu });
        }
        let y = (nu + FRAC_PI_2) / self.h_nu - 0.5;
        let j = y.floor() as isize;
        let (tx, ty) = (x - i as f64, y - j as f64);
        let wx = cubic_weights(tx);
        let wy = cubic_weights(ty);
        let n_nu = self.n_nu as isize;
        let reflect = |k: isize| -> usize {
            let k = if k < 0 { -k - 1 } else if k >= n_nu { 2 * n_nu - k - 1 } else { k };
            k as usize
        };
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let ii = (i - 1 + a as isize) as usize;
            let mut col = 0.0;
            for (b, wb) in wy.iter().enumerate() {
                col += wb * f.values[(reflect(j - 1 + b as isize), ii)];
            }
            acc += wa * col;
        }
        Ok(acc)
    }

    /// Value at a point of R^3 on the given sheet.
    pub fn evaluate_3d(&self, f: &GridField, x: [f64; 3], sheet: Sign) -> Result<f64, SunError> {
        let (mu, nu) = to_elliptic(x[0].hypot(x[1]), x[2], sheet);
        self.interpolate(f, mu, nu)
    }
}

/// `(s, x3)` from elliptic coordinates.
pub fn to_physical(mu: f64, nu: f64) -> (f64, f64) {
    (mu.cosh() * nu.cos(), mu.sinh() * nu.sin())
}

/// Elliptic coordinates of `(s, x3)` on a sheet: the `+` sheet has `mu >= 0`.
pub fn to_elliptic(s: f64, x3: f64, sheet: Sign) -> (f64, f64) {
    let eta = Cx::new(s, x3).acosh();
    let eta = if eta.re < 0.0 { -eta } else { eta };
    match sheet {
        Sign::Plus => (eta.re, eta.im),
        Sign::Minus => (-eta.re, -eta.im),
    }
}

/// Elliptic coordinates of the point at distance `r` from the circle and
/// angle `theta in [0, 4 pi)` on the double cover.
pub fn ring_point(r: f64, theta: f64) -> (f64, f64) {
    let zeta = Cx::from_polar(r.sqrt(), theta / 2.0);
    let eta = (zeta / 2f64.sqrt()).asinh() * 2.0;
    (eta.re, eta.im)
}

/// `J = sinh^2 mu + sin^2 nu`.
pub fn jacobian(mu: f64, nu: f64) -> f64 {
    let (a, b) = (mu.sinh(), nu.sin());
    a * a + b * b
}

/// Sheet of a grid point: `+` for `mu > 0`, `-` for `mu < 0`, 0 on the disc.
pub fn sheet_sign(mu: f64) -> f64 {
    if mu > 0.0 {
        1.0
    } else if mu < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn nu_modes(n: usize, h: f64) -> NuModes {
    let nu = |j: usize| -FRAC_PI_2 + (j as f64 + 0.5) * h;
    let face = |j: usize| -FRAC_PI_2 + j as f64 * h; // face j is below cell j
    let w: Vec<f64> = (0..n).map(|j| nu(j).cos()).collect();
    let c: Vec<f64> = (0..=n).map(|j| if j == 0 || j == n { 0.0 } else { face(j).cos() }).collect();
    // A = -d(cos d) / h^2, symmetrized by diag(cos)^(-1/2).
    let mut s = DMatrix::zeros(n, n);
    let h2 = h * h;
    for j in 0..n {
        s[(j, j)] = (c[j] + c[j + 1]) / h2 / w[j];
        if j + 1 < n {
            let v = -c[j + 1] / h2 / (w[j] * w[j + 1]).sqrt();
            s[(j, j + 1)] = v;
            s[(j + 1, j)] = v;
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lambda: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let q = DMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    let phi = DMatrix::from_fn(n, n, |r, col| q[(r, col)] / w[r].sqrt());
    let proj = DMatrix::from_fn(n, n, |m, r| q[(r, m)] * w[r].sqrt());
    NuModes { lambda, phi, proj }
}

/// `f'/f` at `mu = m` for the solution of `f'' + tanh(mu) f' = lambda f` that
/// decays as `mu -> infinity`, from the Riccati equation integrated inward.
fn decaying_log_derivative(lambda: f64, m: f64) -> f64 {
    let rate = (1.0 + 4.0 * lambda).sqrt();
    // Deviations from the constant-coefficient root relax like exp(-rate mu).
    let far = m + 25.0 / rate.max(1.0);
    let mut y = -(1.0 + rate) / 2.0;
    let rhs = |mu: f64, y: f64| lambda - mu.tanh() * y - y * y;
    let steps = ((far - m) / (0.2 / rate).min(0.01)).ceil() as usize;
    let h = -(far - m) / steps as f64;
    let mut mu = far;
    for _ in 0..steps {
        let k1 = rhs(mu, y);
        let k2 = rhs(mu + h / 2.0, y + h / 2.0 * k1);
        let k3 = rhs(mu + h / 2.0, y + h / 2.0 * k2);
        let k4 = rhs(mu + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        mu += h;
    }
    y
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / den;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_roundtrip() {
        for &(s, x3) in &[(0.5, 0.2), (2.0, -1.5), (0.1, 3.0), (1.0, 1e-3)] {
            for sheet in [Sign::Plus, Sign::Minus] {
                let (mu, nu) = to_elliptic(s, x3, sheet);
                assert!(nu.abs() <= FRAC_PI_2 + 1e-15);
                assert_eq!(mu > 0.0, sheet == Sign::Plus);
                let (s2, x32) = to_physical(mu, nu);
                assert!((s - s2).abs() < 1e-12 && (x3 - x32).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ring_points_are_at_distance_r() {
        for &r in &[1e-3, 0.05] {
            for k in 0..16 {
                let theta = 4.0 * PI * k as f64 / 16.0;
                let (mu, nu) = ring_point(r, theta);
                let (s, x3) = to_physical(mu, nu);
                assert!(((s - 1.0).hypot(x3) - r).abs() < 1e-13);
                // Angle theta/2 of zeta, i.e. theta mod 2 pi in the plane.
                let a = x3.atan2(s - 1.0);
                let d = (a - theta).rem_euclid(2.0 * PI);
                assert!(d < 1e-9 || 2.0 * PI - d < 1e-9);
                // The second turn lands on the other sheet.
                let c = (theta / 2.0).cos();
                if c.abs() > 1e-9 {
                    assert_eq!(mu > 0.0, c > 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let g = DoubleCoverGrid::new(32, 20.0, OuterBoundary::Dirichlet).unwrap();
        let v = g.solve_poisson(&g.zeros()).unwrap();
        assert_eq!(v.max_abs(), 0.0);
    }

    #[test]
    fn solve_has_small_residual() {
        for boundary in [OuterBoundary::Dirichlet, OuterBoundary::Radiation] {
            let g = DoubleCoverGrid::new(64, 20.0, boundary).unwrap();
            let rhs = g.field(|mu, nu| (-(mu - 1.0).powi(2)).exp() * (1.0 + nu.sin()));
            let u = g.solve_scaled(&rhs).unwrap();
            assert!(g.relative_residual(&u, &rhs) < 1e-11);
        }
    }

    #[test]
    fn interpolation_exact_for_cubics() {
        let g = DoubleCoverGrid::new(32, 20.0, OuterBoundary::Dirichlet).unwrap();
        let f = g.field(|mu, nu| mu * mu * mu - 2.0 * mu * nu + nu * nu);
        let (mu, nu) = (0.37, 0.21);
        let exact = mu * mu * mu - 2.0 * mu * nu + nu * nu;
        assert!((g.interpolate(&f, mu, nu).unwrap() - exact).abs() < 1e-12);
        assert!(g.interpolate(&f, 10.0, 0.0).is_err());
    }

    #[test]
    fn radiation_matches_monopole() {
        // lambda = 0: f = atan(1 / sinh mu), f'/f = -1 / (cosh mu atan(1/sinh mu))
        let m = 3.0_f64;
        let exact = -1.0 / (m.cosh() * (1.0 / m.sinh()).atan());
        assert!((decaying_log_derivative(0.0, m) - exact).abs() < 1e-8);
    }
}
