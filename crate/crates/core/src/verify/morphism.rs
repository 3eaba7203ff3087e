//! Laplace–Beltrami residuals of harmonic functions pulled back through the
//! Hopf chart, and the chart operator against the homogeneous extension.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;

use crate::branch::Cx;
use crate::morphisms::{homogeneous_extension_laplacian, laplace_beltrami_residual, MetricChart, SmoothMap};

use super::sampling::rng;
use super::{Check, Settings, VerifyError};

const COARSE_STEP: f64 = 1e-2;
const FINE_STEP: f64 = 5e-3;
const ORACLE_STEP: f64 = 1e-4;
const POINTS: usize = 24;

type Harmonic = (&'static str, fn(Cx) -> f64);

const HARMONICS: [Harmonic; 5] = [
    ("Re Z", |z| z.re),
    ("Im Z^2", |z| (z * z).im),
    ("Re Z^3", |z| (z * z * z).re),
    ("Re 1/(Z - 0.5)", |z| (1.0 / (z - 0.5)).re),
    ("log|Z - (0.2+0.3i)|", |z| (z - Cx::new(0.2, 0.3)).norm().ln()),
];

type Ambient = (&'static str, fn(&[f64]) -> f64);

const AMBIENT: [Ambient; 3] = [
    ("x0 + 2 x3", |x| x[0] + 2.0 * x[3]),
    ("x0 x2 + x1^2", |x| x[0] * x[2] + x[1] * x[1]),
    ("x1 x3 - x2/2 + x0^3", |x| x[1] * x[3] - 0.5 * x[2] + x[0].powi(3)),
];

fn admissible(z: Cx) -> bool {
    z.norm() < 4.0 && (z - 0.5).norm() > 0.3 && (z - Cx::new(0.2, 0.3)).norm() > 0.3
}

pub(super) fn run(p: u32, q: u32, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    // The round metric makes only the Hopf map a harmonic morphism.
    if (p, q) != (1, 1) {
        return Ok(None);
    }
    let tol = &settings.tolerances;
    let chart = MetricChart::HopfS3Round;
    let map = SmoothMap::hopf_chart();
    let image = |x: &[f64]| -> Cx {
        match map.eval(x) {
            Ok(v) => Cx::new(v[0], v[1]),
            Err(_) => Cx::new(f64::NAN, f64::NAN),
        }
    };

    let mut r = rng(settings.seed);
    let mut params = Vec::with_capacity(POINTS);
    for _ in 0..POINTS * 1000 {
        if params.len() == POINTS {
            break;
        }
        let u = vec![r.random_range(0.2..FRAC_PI_2 - 0.2), r.random_range(0.0..TAU), r.random_range(0.0..TAU)];
        if admissible(image(&chart.point(&u))) {
            params.push(u);
        }
    }
    if params.len() < POINTS {
        return Err(VerifyError::TooFewPoints { found: params.len(), wanted: POINTS });
    }

    let (lo, hi) = (tol.get("lb_order_lo"), tol.get("lb_order_hi"));
    let mut worst_dev = 0.0_f64;
    let mut all_in = true;
    let mut order_check = Check::new("lb-residual-order", None, false, 0.0, format!("[{lo}, {hi}]"));
    for (name, h) in HARMONICS {
        let field = |x: &[f64]| h(image(x));
        let (mut coarse, mut fine) = (0.0, 0.0);
        for u in &params {
            coarse += laplace_beltrami_residual(&chart, &field, u, COARSE_STEP)?.abs();
            fine += laplace_beltrami_residual(&chart, &field, u, FINE_STEP)?.abs();
        }
        let order = (coarse / fine).log2();
        all_in &= (lo..=hi).contains(&order);
        worst_dev = worst_dev.max((order - 2.0).abs());
        order_check = order_check.metric(&format!("order[{name}]"), order);
    }
    order_check.passed = all_in;
    order_check.value = worst_dev;
    order_check.bound = format!("order in [{lo}, {hi}] for every harmonic; value = max |order - 2|");

    let mut worst_rel = 0.0_f64;
    for (_, f) in AMBIENT {
        let mut chart_vals = Vec::with_capacity(params.len());
        let mut ext_vals = Vec::with_capacity(params.len());
        for u in &params {
            chart_vals.push(laplace_beltrami_residual(&chart, &f, u, ORACLE_STEP)?);
            ext_vals.push(homogeneous_extension_laplacian(&f, &chart.point(u), ORACLE_STEP)?);
        }
        // Relative to the largest magnitude over the sample.
        let scale = ext_vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in chart_vals.iter().zip(&ext_vals) {
            worst_rel = worst_rel.max((a - b).abs() / scale);
        }
    }
    let oracle = Check::at_most("chart-vs-extension", None, worst_rel, tol.get("cross_oracle"))
        .detail(format!("{} ambient functions, step {ORACLE_STEP}", AMBIENT.len()));
    let parts = [order_check.metric("points", params.len() as f64), oracle];
    let mut checks = vec![Check::summary("harmonic-morphism", 7, &parts)];
    checks.extend(parts);
    Ok(Some(checks))
}
