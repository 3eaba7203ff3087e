//! Richardson test of the FD Laplacian of the potential and agreement of
//! `eval_omega` with the FD gradient.

use crate::catalogue::{FormError, Z2Form};

use super::fd::{central_gradient, laplacian};
use super::sampling::{rng, sample_clear_points, Local, SigmaModel};
use super::{Check, Settings, VerifyError};

const COARSE_STEP: f64 = 1e-2;
const FINE_STEP: f64 = 5e-3;
const GRADIENT_STEP: f64 = 1e-3;

pub(super) fn run(form: &Z2Form, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    let Some(model) = SigmaModel::for_form(form)? else {
        return Ok(None);
    };
    let tol = &settings.tolerances;
    let points = sample_clear_points(&model, form.dim(), settings.points, tol.get("sigma_distance"), &mut rng(settings.seed))?;
    let has_potential = match form.principal_state(&points[0]) {
        Ok(s) => !matches!(form.eval_f(&s), Err(FormError::NoPotential)),
        Err(e) => return Err(e.into()),
    };

    let mut sum_coarse = 0.0;
    let mut sum_fine = 0.0;
    let mut worst_gradient = 0.0_f64;
    for x in &points {
        let local = Local::principal(form, x)?;
        if has_potential {
            let f = |y: &[f64]| local.f(y);
            sum_coarse += laplacian(f, x, COARSE_STEP)?.abs();
            sum_fine += laplacian(f, x, FINE_STEP)?.abs();
            let fd = central_gradient(f, x, GRADIENT_STEP)?;
            let omega = form.eval_omega(&local.state)?;
            let err = omega.0.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            worst_gradient = worst_gradient.max(err / omega.norm());
        } else {
            sum_coarse += divergence(&local, x, COARSE_STEP)?.abs();
            sum_fine += divergence(&local, x, FINE_STEP)?.abs();
        }
    }

    let ratio = sum_coarse / sum_fine;
    let what = if has_potential { "laplacian of f" } else { "divergence of omega" };
    let mut checks = vec![Check::within(
        "richardson-ratio",
        Some(1),
        ratio,
        tol.get("richardson_lo"),
        tol.get("richardson_hi"),
    )
    .metric("points", points.len() as f64)
    .metric("mean_abs_residual_coarse", sum_coarse / points.len() as f64)
    .metric("mean_abs_residual_fine", sum_fine / points.len() as f64)
    .detail(format!("{what}, steps {COARSE_STEP} and {FINE_STEP}"))];
    if has_potential {
        checks.push(
            Check::at_most("gradient-consistency", Some(2), worst_gradient, tol.get("gradient_rel"))
                .metric("points", points.len() as f64)
                .detail(format!("max relative |omega - grad_h f|, h = {GRADIENT_STEP}")),
        );
    }
    Ok(Some(checks))
}

/// Central-difference divergence of the 1-form, continued from `local`.
fn divergence(local: &Local<'_>, x: &[f64], h: f64) -> Result<f64, FormError> {
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let p = local.form.eval_omega(&local.state_at(&y)?)?.0[i];
        y[i] = x[i] - h;
        let m = local.form.eval_omega(&local.state_at(&y)?)?.0[i];
        y[i] = x[i];
        acc += (p - m) / (2.0 * h);
    }
    Ok(acc)
}
