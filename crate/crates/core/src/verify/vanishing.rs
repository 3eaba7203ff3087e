//! Vanishing order of `|omega|` at the branching set from log-log fits,
//! and scale invariance for products of lines.

use rand::seq::IndexedRandom;

use crate::branch::{as_c2, continue_branch, from_c2, Cx, HalfPower, Polyline};
use crate::catalogue::{sample_sigma, Construction, DefiningFunction, FormError, Window, Z2Form};
use crate::morphisms::Fiber;
use crate::sun::log_log_slope;

use super::sampling::{rng, sample_clear_points, Local, SigmaModel};
use super::{Check, Settings, VerifyError};

const SAMPLES: usize = 20;

/// A base point on the set, a unit direction leaving it and the expected
/// exponent of `|omega|` along `base + r dir`.
struct Probe {
    label: String,
    base: Vec<f64>,
    dir: Vec<f64>,
    expected: f64,
    /// Exponent range `[lo, hi]` of `r = 10^e`.
    range: (f64, f64),
}

fn log_radii(range: (f64, f64)) -> Vec<f64> {
    (0..SAMPLES)
        .map(|i| 10f64.powf(range.0 + (range.1 - range.0) * i as f64 / (SAMPLES - 1) as f64))
        .collect()
}

/// `m (2k + 1)/2 - 1`: the exponent of `|h^((2k-1)/2) dh|` where `h` vanishes
/// to order `m`.
fn re_h_exponent(k: HalfPower, m: usize) -> f64 {
    m as f64 * k.exponent() - 1.0
}

/// Keeps `|h|` on the fitted range above the continuation threshold.
fn range_for(m: usize) -> (f64, f64) {
    (-4.0 / m as f64, -2.0 / m as f64)
}

fn group_lines(lines: &[(Cx, Cx)]) -> Vec<((Cx, Cx), usize)> {
    let mut groups: Vec<((Cx, Cx), usize)> = Vec::new();
    for &(a, b) in lines {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        match groups.iter_mut().find(|((c, d), _)| {
            let m = (c.norm_sqr() + d.norm_sqr()).sqrt();
            (a * d - b * c).norm() < 1e-9 * n * m
        }) {
            Some(g) => g.1 += 1,
            None => groups.push(((a, b), 1)),
        }
    }
    groups
}

fn probes(form: &Z2Form, settings: &Settings) -> Result<Option<Vec<Probe>>, VerifyError> {
    let mut r = rng(settings.seed);
    let planar = |p: &crate::catalogue::UnivariatePolynomial, expo: &dyn Fn(usize) -> f64| -> Vec<Probe> {
        p.roots_with_multiplicity(1e-6)
            .into_iter()
            .enumerate()
            .map(|(j, (root, m))| {
                let t = 0.4 + 1.3 * j as f64;
                Probe {
                    label: format!("root {:.4}{:+.4}i (multiplicity {m})", root.re, root.im),
                    base: vec![root.re, root.im],
                    dir: vec![t.cos(), t.sin()],
                    expected: expo(m),
                    range: range_for(m),
                }
            })
            .collect()
    };
    Ok(Some(match form.construction() {
        Construction::ReHPower { h, k } => match h {
            DefiningFunction::ProductOfLines(lines) => group_lines(lines)
                .into_iter()
                .enumerate()
                .map(|(j, ((a, b), m))| {
                    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
                    let t = Cx::from_polar(0.6, 0.5 + 1.1 * j as f64);
                    let phase = Cx::from_polar(1.0, 0.9 + 0.7 * j as f64);
                    Probe {
                        label: format!("line {a}z + {b}w = 0 (multiplicity {m})"),
                        base: from_c2(t * b / n, -t * a / n),
                        dir: from_c2(phase * a.conj() / n, phase * b.conj() / n),
                        expected: re_h_exponent(*k, m),
                        range: range_for(m),
                    }
                })
                .collect(),
            DefiningFunction::Univariate(p) => planar(p, &|m| re_h_exponent(*k, m)),
            _ => {
                let clouds = sample_sigma(h, &Window::cube(4, 1.5), 4000)?;
                let smooth: Vec<(Vec<f64>, Vec<f64>)> = clouds
                    .into_iter()
                    .flat_map(|c| c.points)
                    .filter_map(|x| {
                        let (z, w) = as_c2(&x);
                        let (_, hz, hw) = h.eval_with_partials(z, w);
                        let g = (hz.norm_sqr() + hw.norm_sqr()).sqrt();
                        (g >= 0.3).then(|| {
                            let phase = Cx::from_polar(1.0, 0.8);
                            (x, from_c2(phase * hz.conj() / g, phase * hw.conj() / g))
                        })
                    })
                    .collect();
                smooth
                    .choose_multiple(&mut r, 6)
                    .map(|(x, d)| Probe {
                        label: format!("smooth point {:?}", x.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()),
                        base: x.clone(),
                        dir: d.clone(),
                        expected: re_h_exponent(*k, 1),
                        range: range_for(1),
                    })
                    .collect()
            }
        },
        Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => {
            planar(p, &|m| m as f64 / 2.0)
        }
        Construction::AxialProduct { k } => {
            let d = [0.6_f64, 0.3, 0.74];
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            vec![
                Probe {
                    label: "origin".into(),
                    base: vec![0.0, 0.0, 0.0],
                    dir: d.iter().map(|v| v / n).collect(),
                    expected: k.exponent(),
                    range: range_for(1),
                },
                Probe {
                    label: "(0,0,1)".into(),
                    base: vec![0.0, 0.0, 1.0],
                    dir: vec![0.8, 0.6, 0.0],
                    expected: k.exponent() - 1.0,
                    range: range_for(1),
                },
            ]
        }
        Construction::Pullback { map, base } => {
            let pq = match map {
                crate::morphisms::SmoothMap::Composite(parts) => match parts.as_slice() {
                    [crate::morphisms::SmoothMap::Hopf, crate::morphisms::SmoothMap::Stereographic] => Some((1, 1)),
                    [crate::morphisms::SmoothMap::Seifert { p, q }, crate::morphisms::SmoothMap::Stereographic] => {
                        Some((*p, *q))
                    }
                    _ => None,
                },
                _ => None,
            };
            let poly = match base.construction() {
                Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => Some(p),
                _ => None,
            };
            let (Some((p, q)), Some(poly)) = (pq, poly) else {
                return Ok(None);
            };
            let mut out = Vec::new();
            for (root, m) in poly.roots_with_multiplicity(1e-6) {
                if root.norm() < 1e-9 {
                    continue;
                }
                let (z1, z2) = Fiber::over(p, q, root)?.at(0.3);
                let x0 = from_c2(z1, z2);
                let j = map.jacobian(&x0)?;
                // Gradient direction of Re Z leaves the preimage transversally.
                let g: Vec<f64> = j.row(0).iter().copied().collect();
                let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                out.push(Probe {
                    label: format!("preimage of root {:.4}{:+.4}i (multiplicity {m})", root.re, root.im),
                    base: x0,
                    dir: g.iter().map(|v| v / n).collect(),
                    expected: m as f64 / 2.0,
                    range: range_for(m),
                });
            }
            out
        }
    }))
}

fn fitted_slope(form: &Z2Form, probe: &Probe) -> Result<f64, FormError> {
    let radii = log_radii(probe.range);
    let norms = radii
        .iter()
        .map(|&r| {
            let x: Vec<f64> = probe.base.iter().zip(&probe.dir).map(|(b, d)| b + r * d).collect();
            form.omega_norm_at(&x)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(log_log_slope(&radii, &norms))
}

pub(super) fn run(form: &Z2Form, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    let Some(probes) = probes(form, settings)? else {
        return Ok(None);
    };
    let tol = &settings.tolerances;
    let mut worst = 0.0_f64;
    let mut check_detail = Vec::new();
    let mut slope_check = Check::new("vanishing-slopes", Some(4), false, 0.0, String::new());
    for (i, p) in probes.iter().enumerate() {
        let s = fitted_slope(form, p)?;
        worst = worst.max((s - p.expected).abs());
        slope_check = slope_check.metric(&format!("slope_{i:02}"), s);
        check_detail.push(format!("{}: {s:.4} (expected {})", p.label, p.expected));
    }
    slope_check.passed = !probes.is_empty() && worst <= tol.get("slope");
    slope_check.value = worst;
    slope_check.bound = format!("<= {}", super::fmt_num(tol.get("slope")));
    let mut checks = vec![slope_check.detail(check_detail.join("; "))];

    if let Construction::ReHPower { h: DefiningFunction::ProductOfLines(lines), k } = form.construction() {
        let parts = [tangent_cone(lines, settings)?, homogeneity(form, lines.len(), *k, settings)?];
        checks.push(Check::summary("scale-invariance", 5, &parts));
        checks.extend(parts);
    }
    Ok(Some(checks))
}

/// `Sigma` sampled at scale `r`, pushed to the sphere of radius `r` and
/// rescaled to the unit sphere, against the same at scale 1.
fn tangent_cone(lines: &[(Cx, Cx)], settings: &Settings) -> Result<Check, VerifyError> {
    let h = DefiningFunction::ProductOfLines(lines.to_vec());
    let unit_sphere_sample = |r: f64| -> Result<Vec<Vec<f64>>, VerifyError> {
        let clouds = sample_sigma(&h, &Window::cube(4, r), 400)?;
        Ok(clouds
            .into_iter()
            .flat_map(|c| c.points)
            .filter_map(|x| {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                (n > 0.2 * r).then(|| x.iter().map(|v| v * (r / n) / r).collect())
            })
            .collect())
    };
    let reference = unit_sphere_sample(1.0)?;
    let mut worst = 0.0_f64;
    let mut check = Check::new("tangent-cone", None, false, 0.0, String::new());
    for r in [1e-2, 1e-1, 1.0] {
        let d = crate::catalogue::hausdorff(&unit_sphere_sample(r)?, &reference);
        check = check.metric(&format!("hausdorff_r{r:e}"), d);
        worst = worst.max(d);
    }
    let tol = settings.tolerances.get("hausdorff");
    check.passed = worst <= tol;
    check.value = worst;
    check.bound = format!("<= {}", super::fmt_num(tol));
    Ok(check.metric("points", reference.len() as f64))
}

/// `log|f(lambda x)| - log|f(x)| = (2k+1) J / 2 log(lambda)` with `f(lambda x)`
/// continued along the ray.
fn homogeneity(form: &Z2Form, j: usize, k: HalfPower, settings: &Settings) -> Result<Check, VerifyError> {
    let model = SigmaModel::Lines(match form.construction() {
        Construction::ReHPower { h: DefiningFunction::ProductOfLines(l), .. } => l.clone(),
        _ => unreachable!(),
    });
    let degree = k.exponent() * j as f64;
    let mut r = rng(settings.seed ^ 0x5eed);
    let points = sample_clear_points(&model, 4, 40, settings.tolerances.get("sigma_distance"), &mut r)?;
    let mut worst = 0.0_f64;
    let mut used = 0usize;
    for x in &points {
        let local = Local::principal(form, x)?;
        let f0 = form.eval_f(&local.state)?;
        let full = local.state.sqrt_value * local.state.h_value.powu(k.0);
        // Re of a nearly imaginary value loses relative accuracy.
        if f0.abs() < 1e-3 * full.norm() {
            continue;
        }
        used += 1;
        for lambda in [0.5, 2.0, 10.0] {
            let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            let path = Polyline::new(4, vec![x.clone(), y], false).map_err(FormError::from)?;
            let s = continue_branch(form, &path, &local.state).map_err(FormError::from)?;
            let f1 = form.eval_f(&s)?;
            let err = ((f1.abs().ln() - f0.abs().ln()) - degree * f64::ln(lambda)).abs();
            worst = worst.max(err);
        }
    }
    let tol = settings.tolerances.get("homogeneity");
    Ok(Check::new("homogeneity", None, used > 0 && worst <= tol, worst, format!("<= {}", super::fmt_num(tol)))
        .metric("points", used as f64)
        .metric("degree", degree))
}
