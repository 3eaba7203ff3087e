//! Checks on a Sun pipeline run.

use std::time::Instant;

use crate::sun::{run_pipeline, SunConfig};

use super::{Check, Settings, VerifyError};

const EXTRA: [&str; 4] = ["gradient-oracle-shift", "cutoff-shift", "friedrichs-ratio", "axisymmetry"];

pub(super) fn run(config: &SunConfig, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    let tol = &settings.tolerances;
    let start = Instant::now();
    let report = run_pipeline(config)?;
    let elapsed = start.elapsed().as_secs_f64();
    let m = &report.manufactured;
    let mut resolution = Check::at_most("resolution-shift", None, report.resolution_shift, tol.get("resolution_shift"));
    for (d, a) in report.degrees.iter().zip(&report.a1) {
        resolution = resolution.metric(&format!("a1_plus[{d}]"), a.a_plus).metric(&format!("a1_minus[{d}]"), a.a_minus);
    }
    let mut parts = vec![
        Check::at_least("manufactured-order", None, m.order, tol.get("manufactured_order"))
            .metric("coarse_error", m.coarse_error)
            .metric("fine_error", m.fine_error)
            .metric("coarse_resolution", m.coarse_resolution as f64)
            .metric("fine_resolution", m.fine_resolution as f64),
        Check::at_most("superposition", None, report.superposition_error, tol.get("superposition")),
        resolution,
        Check::at_most("truncation-shift", None, report.truncation_shift, tol.get("truncation_shift")),
        Check::at_least("null-reduction", None, report.null_cross.reduction, tol.get("reduction"))
            .metric("same_grid_reduction", report.null_same.reduction)
            .detail("plan from the half-resolution grid applied to the full-resolution fields"),
        Check::at_least("null-decay-slope", None, report.null_cross.decay_slope, tol.get("decay_slope"))
            .metric("same_grid_slope", report.null_same.decay_slope),
        Check::at_most("gradient-oracle-shift", None, report.gradient_shift, tol.get("gradient_shift")),
        Check::at_most("cutoff-shift", None, report.cutoff_shift, tol.get("cutoff_shift")),
        Check::at_most("friedrichs-ratio", None, report.friedrichs_ratio, tol.get("friedrichs_ratio")),
        Check::at_most("axisymmetry", None, report.axisymmetry_defect, tol.get("axisymmetry")),
    ];
    if settings.timing {
        parts.push(Check::at_most("runtime-seconds", None, elapsed, tol.get("runtime_s")));
    }
    // The summary covers the criterion items: everything except the extra
    // diagnostics, plus the runtime when timed.
    let core: Vec<Check> = parts
        .iter()
        .filter(|c| !EXTRA.contains(&c.name.as_str()))
        .cloned()
        .collect();
    let mut checks = vec![Check::summary("sun-pipeline", 8, &core)];
    checks.extend(parts);
    Ok(Some(checks))
}
