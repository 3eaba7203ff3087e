//! The symmetric construction on the double cover of R^3 branched along the
//! unit circle: `U = +-chi p` on the two sheets, `H = Delta U`, `Delta V = H`,
//! and `u = U - V`, harmonic on the cover with
//! `u = A1+ cos(theta/2) r^{1/2} + A1- sin(theta/2) r^{1/2} + O(r^{3/2})`.
//! Combinations of zonal `p` with `A1 = 0` decay like `r^{3/2}`.

mod cutoff;
mod extract;
mod grid;
mod zonal;

use serde::Serialize;
use thiserror::Error;

use crate::branch::Sign;

pub use cutoff::{Cutoff, Smoothstep};
pub use extract::{
    a1_from_gradient, default_rings, extract_a1, extract_a1_from, log_log_slope, log_rings, null_combination,
    ring_projections, ring_rms, LeadingCoefficients, NullCombination, FIT_TOLERANCE, RING_SAMPLES,
};
pub use grid::{
    jacobian, ring_point, sheet_sign, to_elliptic, to_physical, DoubleCoverGrid, GridField, OuterBoundary,
    REFERENCE_TRUNCATION, SOLVER_TOLERANCE,
};
pub use zonal::{legendre, zonal, ZonalPolynomial, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SunError {
    #[error("degree {k} exceeds the supported maximum")]
    DegreeTooLarge { k: u32 },
    #[error("cutoff radii must satisfy R2 > R1 > 1 (got {r1}, {r2})")]
    InvalidCutoff { r1: f64, r2: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("solver residual {residual:e} above tolerance")]
    SolverDiverged { residual: f64 },
    #[error("manufactured-solution error {error:e} above tolerance {tolerance:e}")]
    GridTooCoarse { error: f64, tolerance: f64 },
    #[error("ring fit residual {residual} above tolerance")]
    FitIllConditioned { residual: f64 },
    #[error("need at least 3 degrees for a null direction, got {count}")]
    NoNullDirection { count: usize },
    #[error("point (mu, nu) = ({mu}, {nu}) outside the grid")]
    OutsideGrid { mu: f64, nu: f64 },
}

/// `H = +-(p chi'' + chi' (2 chi'/rho ... ))`, precisely
/// `sheet * (p Delta chi + 2 grad chi . grad p)` with `Delta p = 0`.
pub fn source_h(p: &ZonalPolynomial, chi: &Cutoff, s: f64, x3: f64, sheet: Sign) -> f64 {
    let rho = s.hypot(x3);
    let (_, d1, d2) = chi.eval(rho);
    if d1 == 0.0 && d2 == 0.0 {
        return 0.0;
    }
    sheet.value() * (p.eval(s, x3) * d2 + d1 * p.source_weight(s, x3))
}

/// `H` at the grid points.
pub fn source_field(grid: &DoubleCoverGrid, p: &ZonalPolynomial, chi: &Cutoff) -> GridField {
    grid.field(|mu, nu| {
        let sign = sheet_sign(mu);
        if sign == 0.0 {
            return 0.0;
        }
        let (s, x3) = to_physical(mu, nu);
        source_h(p, chi, s, x3, if sign > 0.0 { Sign::Plus } else { Sign::Minus })
    })
}

/// `U = +-chi p` at the grid points.
pub fn sheeted_field(grid: &DoubleCoverGrid, p: &ZonalPolynomial, chi: &Cutoff) -> GridField {
    grid.field(|mu, nu| {
        let (s, x3) = to_physical(mu, nu);
        sheet_sign(mu) * chi.value(s.hypot(x3)) * p.eval(s, x3)
    })
}

/// `u = U - V` with `Delta V = Delta U`.
pub fn harmonic_section(grid: &DoubleCoverGrid, p: &ZonalPolynomial, chi: &Cutoff) -> Result<GridField, SunError> {
    let v = grid.solve_poisson(&source_field(grid, p, chi))?;
    Ok(sheeted_field(grid, p, chi).sub(&v))
}

/// Manufactured solution `V* = (1 - (mu/a)^2)^4 cos^2 nu (1 + sin nu)` for
/// `|mu| < a`, with `a = 0.8 M`; `H* = Delta V*` in closed form.
pub fn manufactured_error(grid: &DoubleCoverGrid) -> Result<f64, SunError> {
    let a = 0.8 * grid.mu_max();
    let phi = |mu: f64| -> (f64, f64, f64) {
        let q = (mu / a).powi(2);
        if q >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let g = 1.0 - q;
        let dq = 2.0 * mu / (a * a);
        (g.powi(4), -4.0 * g.powi(3) * dq, 12.0 * g * g * dq * dq - 8.0 * g.powi(3) / (a * a))
    };
    let psi = |nu: f64| {
        let (s, c) = nu.sin_cos();
        c * c * (1.0 + s)
    };
    // (1/cos nu) d(cos nu psi') in closed form.
    let l_psi = |nu: f64| {
        let (s, c) = nu.sin_cos();
        4.0 * s * s - 2.0 * c * c + 4.0 * s * s * s - 8.0 * c * c * s
    };
    let h = grid.field(|mu, nu| {
        let (f, f1, f2) = phi(mu);
        ((f2 + mu.tanh() * f1) * psi(nu) + f * l_psi(nu)) / jacobian(mu, nu)
    });
    let v = grid.solve_poisson(&h)?;
    let exact = grid.field(|mu, nu| phi(mu).0 * psi(nu));
    Ok(v.sub(&exact).max_abs())
}

/// Fails with `GridTooCoarse` when the manufactured solution misses `tolerance`.
pub fn validate_grid(grid: &DoubleCoverGrid, tolerance: f64) -> Result<f64, SunError> {
    let error = manufactured_error(grid)?;
    if !(error <= tolerance) {
        return Err(SunError::GridTooCoarse { error, tolerance });
    }
    Ok(error)
}

/// Parameters of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SunConfig {
    pub degrees: Vec<u32>,
    pub resolution: usize,
    pub truncation: f64,
    pub r1: f64,
    pub r2: f64,
    #[serde(serialize_with = "ser_smoothstep")]
    pub cutoff: Smoothstep,
    #[serde(serialize_with = "ser_boundary")]
    pub boundary: OuterBoundary,
}

fn ser_smoothstep<S: serde::Serializer>(v: &Smoothstep, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match v {
        Smoothstep::Quintic => "quintic",
        Smoothstep::Cubic => "cubic",
        Smoothstep::Septic => "septic",
    })
}

fn ser_boundary<S: serde::Serializer>(v: &OuterBoundary, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match v {
        OuterBoundary::Dirichlet => "dirichlet",
        OuterBoundary::Radiation => "radiation",
    })
}

impl Default for SunConfig {
    fn default() -> Self {
        SunConfig {
            degrees: vec![0, 1, 2, 3, 4],
            resolution: 512,
            truncation: 20.0,
            r1: 1.5,
            r2: 3.5,
            cutoff: Smoothstep::Septic,
            boundary: OuterBoundary::Radiation,
        }
    }
}

impl SunConfig {
    pub fn cutoff(&self) -> Result<Cutoff, SunError> {
        Cutoff::new(self.r1, self.r2, self.cutoff)
    }

    pub fn grid(&self) -> Result<DoubleCoverGrid, SunError> {
        DoubleCoverGrid::new(self.resolution, self.truncation, self.boundary)
    }
}

/// Fields and leading coefficients of each degree on one grid.
#[derive(Debug, Clone)]
pub struct DegreeTable {
    pub degrees: Vec<u32>,
    pub fields: Vec<GridField>,
    pub a1: Vec<LeadingCoefficients>,
}

pub fn degree_table(grid: &DoubleCoverGrid, chi: &Cutoff, degrees: &[u32]) -> Result<DegreeTable, SunError> {
    let rings = default_rings(grid);
    let mut fields = Vec::with_capacity(degrees.len());
    let mut a1 = Vec::with_capacity(degrees.len());
    for &k in degrees {
        let u = harmonic_section(grid, &ZonalPolynomial::single(k)?, chi)?;
        a1.push(extract_a1(grid, &u, &rings)?);
        fields.push(u);
    }
    Ok(DegreeTable { degrees: degrees.to_vec(), fields, a1 })
}

/// Null direction of the unit-`A1` columns of a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullPlan {
    /// Unit vector over the normalized columns.
    pub unit: Vec<f64>,
    /// `|A1|` of each degree used for the normalization.
    pub reference_norms: Vec<f64>,
}

impl NullPlan {
    /// Coefficients for the raw fields `u_k`.
    pub fn coefficients(&self) -> Vec<f64> {
        self.unit.iter().zip(&self.reference_norms).map(|(c, n)| c / n).collect()
    }
}

pub fn null_plan(table: &DegreeTable, tol: f64) -> Result<NullPlan, SunError> {
    let reference_norms: Vec<f64> = table.a1.iter().map(|a| a.norm()).collect();
    if let Some(k) = reference_norms.iter().position(|n| !(*n > 0.0)) {
        return Err(SunError::InvalidGrid(format!("degree {} has A1 = 0", table.degrees[k])));
    }
    let cols: Vec<(f64, f64)> =
        table.a1.iter().zip(&reference_norms).map(|(a, n)| (a.a_plus / n, a.a_minus / n)).collect();
    let null = null_combination(&cols, tol)?;
    Ok(NullPlan { unit: null.coefficients, reference_norms })
}

/// Effect of a null plan (possibly from another grid) on a table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullAnalysis {
    pub coefficients: Vec<f64>,
    pub combined_a1: LeadingCoefficients,
    /// Smallest `|A1(u_k)| / |A1_k|_ref` over single degrees, divided by
    /// `|A1(u_c)|`.
    pub reduction: f64,
    pub decay_radii: Vec<f64>,
    pub decay_rms: Vec<f64>,
    pub decay_slope: f64,
}

pub fn combine(grid: &DoubleCoverGrid, table: &DegreeTable, coefficients: &[f64]) -> GridField {
    let mut u = grid.zeros();
    for (b, f) in coefficients.iter().zip(&table.fields) {
        u = u.axpy(*b, f);
    }
    u
}

/// Rings for the decay slope: `sqrt(r) >= 5 h_zeta` up to `r = 0.05`.
pub fn decay_rings(grid: &DoubleCoverGrid) -> Vec<f64> {
    log_rings((5.0 * grid.zeta_step()).powi(2), 0.05, 16)
}

pub fn analyze_null(grid: &DoubleCoverGrid, table: &DegreeTable, plan: &NullPlan) -> Result<NullAnalysis, SunError> {
    let coefficients = plan.coefficients();
    let u = combine(grid, table, &coefficients);
    let combined_a1 = extract_a1(grid, &u, &default_rings(grid))?;
    let best_single = table
        .a1
        .iter()
        .zip(&plan.reference_norms)
        .map(|(a, n)| a.norm() / n)
        .fold(f64::INFINITY, f64::min);
    let reduction = best_single / combined_a1.norm().max(f64::MIN_POSITIVE);
    let decay_radii = decay_rings(grid);
    let sample = |r: f64, theta: f64| {
        let (mu, nu) = ring_point(r, theta);
        grid.interpolate(&u, mu, nu)
    };
    let decay_rms = decay_radii.iter().map(|&r| ring_rms(&sample, r)).collect::<Result<Vec<_>, _>>()?;
    let decay_slope = log_log_slope(&decay_radii, &decay_rms);
    Ok(NullAnalysis { coefficients, combined_a1, reduction, decay_radii, decay_rms, decay_slope })
}

/// Largest manufactured-solution error accepted by `validate_grid` in the
/// pipeline.
pub const MANUFACTURED_TOLERANCE: f64 = 1e-3;

/// Manufactured-solution errors at two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub coarse_resolution: usize,
    pub fine_resolution: usize,
    pub coarse_error: f64,
    pub fine_error: f64,
    pub order: f64,
}

pub fn manufactured_convergence(fine: &DoubleCoverGrid) -> Result<Convergence, SunError> {
    let coarse = DoubleCoverGrid::new(fine_resolution(fine) / 2, fine.truncation(), fine.boundary())?;
    let coarse_error = manufactured_error(&coarse)?;
    let fine_error = manufactured_error(fine)?;
    Ok(Convergence {
        coarse_resolution: fine_resolution(fine) / 2,
        fine_resolution: fine_resolution(fine),
        coarse_error,
        fine_error,
        order: (coarse_error / fine_error).log2(),
    })
}

fn fine_resolution(grid: &DoubleCoverGrid) -> usize {
    grid.n_nu()
}

/// Largest `|A1_a - A1_b| / |A1_b|` over matching entries.
pub fn max_relative_shift(a: &[LeadingCoefficients], b: &[LeadingCoefficients]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.a_plus - y.a_plus).hypot(x.a_minus - y.a_minus) / y.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// `|proj(r)| / r^{1/2}` on the smallest ring over the same on the largest.
/// Bounded for the `r^{1/2}` branch, of order `r_max / r_min` for `r^{-1/2}`.
pub fn friedrichs_ratio(grid: &DoubleCoverGrid, u: &GridField) -> Result<f64, SunError> {
    let rings = default_rings(grid);
    let sample = |r: f64, theta: f64| {
        let (mu, nu) = ring_point(r, theta);
        grid.interpolate(u, mu, nu)
    };
    let scaled = |r: f64| -> Result<f64, SunError> {
        let (c, s) = ring_projections(&sample, r)?;
        Ok(c.hypot(s) / r.sqrt())
    };
    let lo = scaled(rings[0])?;
    let hi = scaled(rings[rings.len() - 1])?;
    Ok(lo / hi.max(f64::MIN_POSITIVE))
}

/// Largest difference of a field rebuilt in R^3 between points related by
/// rotations about the `x3`-axis.
pub fn axisymmetry_defect(grid: &DoubleCoverGrid, u: &GridField) -> Result<f64, SunError> {
    let mut worst = 0.0_f64;
    for &(s, x3) in &[(0.7, 0.2), (1.2, -0.4), (2.5, 1.0), (0.3, -1.5)] {
        for sheet in [Sign::Plus, Sign::Minus] {
            let base = grid.evaluate_3d(u, [s, 0.0, x3], sheet)?;
            for t in [0.4_f64, 1.9, 3.3, 5.0] {
                let v = grid.evaluate_3d(u, [s * t.cos(), s * t.sin(), x3], sheet)?;
                worst = worst.max((v - base).abs());
            }
        }
    }
    Ok(worst)
}

/// Everything the pipeline measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SunReport {
    pub config: SunConfig,
    pub manufactured: Convergence,
    pub degrees: Vec<u32>,
    pub a1: Vec<LeadingCoefficients>,
    pub a1_coarse: Vec<LeadingCoefficients>,
    pub a1_gradient: Vec<LeadingCoefficients>,
    pub a1_doubled_truncation: Vec<LeadingCoefficients>,
    pub a1_alternate_cutoff: Vec<LeadingCoefficients>,
    pub resolution_shift: f64,
    pub gradient_shift: f64,
    pub truncation_shift: f64,
    pub cutoff_shift: f64,
    pub superposition_error: f64,
    pub null_plan: NullPlan,
    /// Plan from the coarse grid applied to the fine fields.
    pub null_cross: NullAnalysis,
    /// Plan and fields from the fine grid.
    pub null_same: NullAnalysis,
    pub friedrichs_ratio: f64,
    pub axisymmetry_defect: f64,
}

/// Same smoothstep on a shell moved out by 1/2.
pub fn alternate_cutoff(config: &SunConfig) -> Result<Cutoff, SunError> {
    Cutoff::new(config.r1 + 0.5, config.r2 + 0.5, config.cutoff)
}

pub fn run_pipeline(config: &SunConfig) -> Result<SunReport, SunError> {
    if config.resolution < 16 || config.resolution % 4 != 0 {
        return Err(SunError::InvalidGrid(format!("resolution {} must be a multiple of 4, at least 16", config.resolution)));
    }
    let chi = config.cutoff()?;
    let grid = config.grid()?;
    validate_grid(&grid, MANUFACTURED_TOLERANCE)?;
    let manufactured = manufactured_convergence(&grid)?;

    let table = degree_table(&grid, &chi, &config.degrees)?;
    let coarse_grid = DoubleCoverGrid::new(config.resolution / 2, config.truncation, config.boundary)?;
    let coarse = degree_table(&coarse_grid, &chi, &config.degrees)?;
    let wide_grid = DoubleCoverGrid::new(config.resolution, 2.0 * config.truncation, config.boundary)?;
    let wide = degree_table(&wide_grid, &chi, &config.degrees)?;
    let alt = degree_table(&grid, &alternate_cutoff(config)?, &config.degrees)?;
    let a1_gradient: Vec<LeadingCoefficients> = table.fields.iter().map(|u| a1_from_gradient(&grid, u)).collect();

    // Superposition on two of the degrees, through the full pipeline.
    let (ka, kb) = match config.degrees.as_slice() {
        [a, b, ..] => (*a, *b),
        _ => (2, 3),
    };
    let (alpha, beta) = (0.7, -1.3);
    let mixed = ZonalPolynomial::new(vec![(ka, alpha), (kb, beta)])?;
    let mixed_a1 = extract_a1(&grid, &harmonic_section(&grid, &mixed, &chi)?, &default_rings(&grid))?;
    let single = |k: u32| -> Result<LeadingCoefficients, SunError> {
        match config.degrees.iter().position(|d| *d == k) {
            Some(i) => Ok(table.a1[i]),
            None => extract_a1(&grid, &harmonic_section(&grid, &ZonalPolynomial::single(k)?, &chi)?, &default_rings(&grid)),
        }
    };
    let (sa, sb) = (single(ka)?, single(kb)?);
    let expected = LeadingCoefficients {
        a_plus: alpha * sa.a_plus + beta * sb.a_plus,
        a_minus: alpha * sa.a_minus + beta * sb.a_minus,
        fit_residual: 0.0,
    };
    let superposition_error = max_relative_shift(&[mixed_a1], &[expected]);

    let fine_plan = null_plan(&table, 1.0)?;
    let coarse_plan = null_plan(&coarse, 1.0)?;
    let null_cross = analyze_null(&grid, &table, &coarse_plan)?;
    let null_same = analyze_null(&grid, &table, &fine_plan)?;

    let mut friedrichs = 0.0_f64;
    let mut axis = 0.0_f64;
    for u in &table.fields {
        friedrichs = friedrichs.max(friedrichs_ratio(&grid, u)?);
        axis = axis.max(axisymmetry_defect(&grid, u)?);
    }

    Ok(SunReport {
        config: config.clone(),
        manufactured,
        degrees: config.degrees.clone(),
        resolution_shift: max_relative_shift(&coarse.a1, &table.a1),
        gradient_shift: max_relative_shift(&a1_gradient, &table.a1),
        truncation_shift: max_relative_shift(&wide.a1, &table.a1),
        cutoff_shift: max_relative_shift(&alt.a1, &table.a1),
        a1: table.a1,
        a1_coarse: coarse.a1,
        a1_gradient,
        a1_doubled_truncation: wide.a1,
        a1_alternate_cutoff: alt.a1,
        superposition_error,
        null_plan: fine_plan,
        null_cross,
        null_same,
        friedrichs_ratio: friedrichs,
        axisymmetry_defect: axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_vanishes_off_shell_and_is_odd() {
        let chi = Cutoff::new(3.0, 5.0, Smoothstep::Quintic).unwrap();
        let p = ZonalPolynomial::single(1).unwrap();
        assert_eq!(source_h(&p, &chi, 1.0, 0.5, Sign::Plus), 0.0);
        assert_eq!(source_h(&p, &chi, 6.0, 0.5, Sign::Plus), 0.0);
        let (s, x3) = (3.0, 2.0);
        let plus = source_h(&p, &chi, s, x3, Sign::Plus);
        assert!(plus != 0.0);
        assert_eq!(plus, -source_h(&p, &chi, s, x3, Sign::Minus));
    }

    #[test]
    fn source_matches_fd_laplacian() {
        let chi = Cutoff::new(3.0, 5.0, Smoothstep::Quintic).unwrap();
        let p = ZonalPolynomial::new(vec![(2, 1.0), (3, -0.5)]).unwrap();
        let u = |x: [f64; 3]| {
            let s = x[0].hypot(x[1]);
            chi.value(s.hypot(x[2])) * p.eval(s, x[2])
        };
        let x = [2.1, 1.4, 2.3];
        let h = 1e-3;
        let mut lap = 0.0;
        for d in 0..3 {
            let mut a = x;
            let mut b = x;
            a[d] += h;
            b[d] -= h;
            lap += u(a) + u(b) - 2.0 * u(x);
        }
        lap /= h * h;
        let exact = source_h(&p, &chi, x[0].hypot(x[1]), x[2], Sign::Plus);
        assert!((lap - exact).abs() < 1e-4 * exact.abs().max(1.0), "{lap} {exact}");
    }

    #[test]
    fn manufactured_converges() {
        let e1 = manufactured_error(&DoubleCoverGrid::new(32, 20.0, OuterBoundary::Dirichlet).unwrap()).unwrap();
        let e2 = manufactured_error(&DoubleCoverGrid::new(64, 20.0, OuterBoundary::Dirichlet).unwrap()).unwrap();
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "{e1} {e2} {order}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = DoubleCoverGrid::new(64, 20.0, OuterBoundary::Radiation).unwrap();
        assert!(matches!(validate_grid(&g, MANUFACTURED_TOLERANCE), Err(SunError::GridTooCoarse { .. })));
    }

    #[test]
    fn parity_of_leading_coefficients() {
        let g = DoubleCoverGrid::new(128, 20.0, OuterBoundary::Radiation).unwrap();
        let chi = Cutoff::new(1.5, 3.5, Smoothstep::Septic).unwrap();
        let t = degree_table(&g, &chi, &[0, 1, 2, 3]).unwrap();
        for (k, a) in t.degrees.iter().zip(&t.a1) {
            let (major, minor) = if k % 2 == 0 { (a.a_plus, a.a_minus) } else { (a.a_minus, a.a_plus) };
            assert!(major.abs() > 0.5 && minor.abs() < 1e-10, "{k} {a:?}");
        }
    }

    #[test]
    fn small_pipeline() {
        let config = SunConfig { resolution: 128, ..SunConfig::default() };
        let r = run_pipeline(&config).unwrap();
        assert!(r.manufactured.order > 1.8);
        assert!(r.superposition_error < 1e-10);
        assert!(r.null_same.reduction > 1e6);
        assert!(r.axisymmetry_defect < 1e-12);
        assert!(r.friedrichs_ratio < 2.0);
    }

    #[test]
    fn pipeline_rejects_bad_resolution() {
        let config = SunConfig { resolution: 30, ..SunConfig::default() };
        assert!(matches!(run_pipeline(&config), Err(SunError::InvalidGrid(_))));
    }
}
