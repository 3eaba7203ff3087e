//! Linking of regular fibers, covering degree near the `{z2 = 0}` core and
//! winding pairs.

use crate::branch::{Cx, Polyline};
use crate::morphisms::{
    covering_degree, crossing_linking_number, gauss_linking, project_to_r3, Fiber, MorphismError,
};

use super::{Check, Settings, VerifyError};

const RESOLUTIONS: [usize; 2] = [1024, 2048];
const VIEW: [f64; 3] = [0.31, 0.17, 0.93];
const FAR_POINT: Cx = Cx::new(400.0, 300.0);

/// Gauss linking after projecting both fibers from the same pole.
fn linking(a: &Fiber, b: &Fiber, n: usize, pole: [f64; 4]) -> Result<(f64, Polyline, Polyline), MorphismError> {
    let ca = project_to_r3(&a.to_polyline(n)?, pole)?;
    let cb = project_to_r3(&b.to_polyline(n)?, pole)?;
    Ok((gauss_linking(&ca, &cb)?, ca, cb))
}

/// Largest distance from the fiber to the core circle `{|z1| = 1, z2 = 0}`.
fn distance_to_core(f: &Fiber, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let (z1, z2) = f.at(std::f64::consts::TAU * i as f64 / n as f64);
            (1.0 - z1.norm()).hypot(z2.norm())
        })
        .fold(0.0, f64::max)
}

pub(super) fn run(p: u32, q: u32, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    let tol = &settings.tolerances;
    let a = Fiber::over(p, q, Cx::new(0.6, 0.3))?;
    let b = Fiber::over(p, q, Cx::new(-1.2, 0.8))?;
    // A pole off both fibers: the point over a third value.
    let (pz1, pz2) = Fiber::over(p, q, Cx::new(0.1, -2.0))?.at(0.0);
    let pole = [pz1.re, pz1.im, pz2.re, pz2.im];

    let expected = (p * q) as f64;
    let link_tol = if (p, q) == (1, 1) { tol.get("hopf_link") } else { tol.get("torus_link") };
    let (l_coarse, _, _) = linking(&a, &b, RESOLUTIONS[0], pole)?;
    let (l_fine, ca, cb) = linking(&a, &b, RESOLUTIONS[1], pole)?;
    let crossings = crossing_linking_number(&ca, &cb, VIEW)?;
    let err = (l_coarse.abs() - expected).abs().max((l_fine.abs() - expected).abs());
    let agree = (l_coarse - l_fine).abs();
    let mut parts = vec![
        Check::at_most("linking-number", None, err, link_tol)
            .metric("gauss_coarse", l_coarse)
            .metric("gauss_fine", l_fine)
            .metric("expected_abs", expected)
            .detail(format!("fibers over 0.6+0.3i and -1.2+0.8i, {} and {} vertices", RESOLUTIONS[0], RESOLUTIONS[1])),
        Check::at_most("linking-resolution-agreement", None, agree, link_tol),
        Check::new(
            "linking-crossing-oracle",
            None,
            crossings as f64 == l_fine.round(),
            crossings as f64,
            format!("= round(gauss) = {}", l_fine.round()),
        ),
    ];

    let near = Fiber::over(p, q, FAR_POINT)?;
    let core = Fiber::core_z2(p, q)?;
    let tube = distance_to_core(&near, 1024);
    let degree = covering_degree(&near, &core, 1024)?;
    parts.push(
        Check::new("covering-degree", None, degree == q as i64 && tube <= tol.get("tube"), degree as f64, format!("= {q}"))
            .metric("distance_to_core", tube)
            .detail("fiber over 400+300i against the core {z2 = 0}"),
    );
    let (wa, wb) = a.winding_pair(1024);
    parts.push(
        Check::new("winding-pair", None, (wa, wb) == (q as i64, p as i64), wa as f64, format!("= ({q}, {p})"))
            .metric("winding_z1", wa as f64)
            .metric("winding_z2", wb as f64),
    );
    let mut checks = vec![Check::summary("topology", 6, &parts)];
    checks.extend(parts);
    Ok(Some(checks))
}
