//! Signs of meridian loops around branching components, their stability
//! under refinement, and agreement with the winding number of `h`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::seq::IndexedRandom;

use crate::branch::{from_c2, monodromy, BranchFunction, Cx, Polyline, Sign};
use crate::catalogue::{sample_sigma, Construction, DefiningFunction, UnivariatePolynomial, Window, Z2Form};
use crate::morphisms::{Fiber, SmoothMap};

use super::fd::winding_number;
use super::sampling::rng;
use super::{Check, Settings, VerifyError};

const LOOP_VERTICES: usize = 64;
const ORACLE_REFINEMENT: usize = 8;

struct Loop {
    label: String,
    path: Polyline,
    expected: Sign,
}

fn parity(m: usize) -> Sign {
    if m % 2 == 1 {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

/// Circle `center + eps (cos t u + sin t v)`.
fn circle(center: &[f64], u: &[f64], v: &[f64], eps: f64) -> Result<Polyline, VerifyError> {
    let path = Polyline::sample(center.len(), LOOP_VERTICES, true, |s| {
        let (c, sn) = ((TAU * s).cos(), (TAU * s).sin());
        (0..center.len()).map(|k| center[k] + eps * (c * u[k] + sn * v[k])).collect()
    })
    .map_err(crate::catalogue::FormError::from)?;
    Ok(path)
}

/// Meridian in C^2 around a smooth point `(z, w)` with complex normal `n`.
fn c2_meridian(p: (Cx, Cx), n: (Cx, Cx), eps: f64) -> Result<Polyline, VerifyError> {
    let center = from_c2(p.0, p.1);
    let u = from_c2(n.0, n.1);
    let i = Cx::new(0.0, 1.0);
    let v = from_c2(i * n.0, i * n.1);
    circle(&center, &u, &v, eps)
}

/// Roots with multiplicity and a loop radius that isolates each root.
fn root_loops(p: &UnivariatePolynomial, label: &str) -> Result<Vec<Loop>, VerifyError> {
    let roots = p.roots_with_multiplicity(1e-6);
    let mut sep = f64::INFINITY;
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            sep = sep.min((a.0 - b.0).norm());
        }
    }
    let eps = (0.3 * sep).min(0.1);
    roots
        .iter()
        .map(|&(r, m)| {
            Ok(Loop {
                label: format!("{label} root {:.6}{:+.6}i (multiplicity {m})", r.re, r.im),
                path: circle(&[r.re, r.im], &[1.0, 0.0], &[0.0, 1.0], eps)?,
                expected: parity(m),
            })
        })
        .collect()
}

fn line_loops(lines: &[(Cx, Cx)]) -> Result<Vec<Loop>, VerifyError> {
    // Group proportional lines; the multiplicity is the group size.
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
        .iter()
        .enumerate()
        .map(|(j, &((a, b), m))| {
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let t = Cx::from_polar(0.7, 0.3 + j as f64);
            let p = (t * b / n, -t * a / n);
            let normal = (a.conj() / n, b.conj() / n);
            Ok(Loop {
                label: format!("meridian of line {a}z + {b}w = 0 (multiplicity {m})"),
                path: c2_meridian(p, normal, 0.05)?,
                expected: parity(m),
            })
        })
        .collect()
}

fn implicit_loops(h: &DefiningFunction, settings: &Settings) -> Result<Vec<Loop>, VerifyError> {
    let clouds = sample_sigma(h, &Window::cube(4, 1.5), 4000)?;
    let smooth: Vec<(Vec<f64>, (Cx, Cx))> = clouds
        .into_iter()
        .flat_map(|c| c.points)
        .filter_map(|x| {
            let (z, w) = crate::branch::as_c2(&x);
            let (_, hz, hw) = h.eval_with_partials(z, w);
            let g = (hz.norm_sqr() + hw.norm_sqr()).sqrt();
            (g >= 0.3).then(|| (x, (hz.conj() / g, hw.conj() / g)))
        })
        .collect();
    let mut r = rng(settings.seed);
    smooth
        .choose_multiple(&mut r, 6)
        .map(|(x, n)| {
            let (z, w) = crate::branch::as_c2(x);
            Ok(Loop {
                label: format!("meridian at smooth point ({:.4}{:+.4}i, {:.4}{:+.4}i)", z.re, z.im, w.re, w.im),
                path: c2_meridian((z, w), *n, 1e-2)?,
                expected: Sign::Minus,
            })
        })
        .collect()
}

/// Meridians of both components of `(z - b)(w - c) = 0`.
fn axis_loops(b: Cx, c: Cx) -> Result<Vec<Loop>, VerifyError> {
    let one = Cx::new(1.0, 0.0);
    let zero = Cx::new(0.0, 0.0);
    Ok(vec![
        Loop {
            label: "meridian of {z = b}".into(),
            path: c2_meridian((b, c + 0.7), (one, zero), 0.1)?,
            expected: Sign::Minus,
        },
        Loop {
            label: "meridian of {w = c}".into(),
            path: c2_meridian((b + 0.7, c), (zero, one), 0.1)?,
            expected: Sign::Minus,
        },
    ])
}

fn chart_pq(map: &SmoothMap) -> Option<(u32, u32)> {
    match map {
        SmoothMap::Composite(parts) => match parts.as_slice() {
            [SmoothMap::Hopf, SmoothMap::Stereographic] => Some((1, 1)),
            [SmoothMap::Seifert { p, q }, SmoothMap::Stereographic] => Some((*p, *q)),
            _ => None,
        },
        _ => None,
    }
}

fn base_polynomial(base: &Z2Form) -> Option<&UnivariatePolynomial> {
    match base.construction() {
        Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => Some(p),
        Construction::ReHPower { h: DefiningFunction::Univariate(p), .. } => Some(p),
        _ => None,
    }
}

/// Meridians of the preimage of each base root, and one fiber loop, which
/// the chart maps to a point and so carries sign `+1`.
fn pullback_loops(map: &SmoothMap, base: &Z2Form) -> Result<Option<Vec<Loop>>, VerifyError> {
    let (Some((p, q)), Some(poly)) = (chart_pq(map), base_polynomial(base)) else {
        return Ok(None);
    };
    let mut loops = Vec::new();
    for (r, m) in poly.roots_with_multiplicity(1e-6) {
        if r.norm() < 1e-9 {
            continue;
        }
        let fiber = Fiber::over(p, q, r)?;
        let (z1, z2) = fiber.at(0.3);
        let x0 = from_c2(z1, z2);
        // Columns of the pseudo-inverse of the chart Jacobian map onto the
        // unit directions of the base.
        let j = map.jacobian(&x0)?;
        let jjt = &j * j.transpose();
        let Some(inv) = jjt.try_inverse() else { continue };
        let pinv: DMatrix<f64> = j.transpose() * inv;
        let u: Vec<f64> = pinv.column(0).iter().copied().collect();
        let v: Vec<f64> = pinv.column(1).iter().copied().collect();
        loops.push(Loop {
            label: format!("meridian of the preimage of root {:.6}{:+.6}i (multiplicity {m})", r.re, r.im),
            path: circle(&x0, &u, &v, 1e-2)?,
            expected: parity(m),
        });
    }
    let roots = poly.roots();
    let mut zc = Cx::new(0.37, -0.61);
    while roots.iter().any(|r| (r - zc).norm() < 0.2) {
        zc += Cx::new(0.5, 0.3);
    }
    loops.push(Loop {
        label: format!("fiber over {:.2}{:+.2}i", zc.re, zc.im),
        path: Fiber::over(p, q, zc)?.to_polyline(256)?,
        expected: Sign::Plus,
    });
    Ok(Some(loops))
}

fn loops_for(form: &Z2Form, settings: &Settings) -> Result<Option<Vec<Loop>>, VerifyError> {
    Ok(Some(match form.construction() {
        Construction::ReHPower { h, .. } => match h {
            DefiningFunction::ProductOfLines(lines) => line_loops(lines)?,
            DefiningFunction::Univariate(p) => root_loops(p, "h")?,
            DefiningFunction::Node { a, b, c } if a.norm() == 0.0 => axis_loops(*b, *c)?,
            _ => implicit_loops(h, settings)?,
        },
        Construction::PlanarSqrt { p } => root_loops(p, "p")?,
        Construction::QuadraticDifferentialSqrt { q } => root_loops(q, "q")?,
        Construction::AxialProduct { .. } => [0.5, -1.0]
            .iter()
            .map(|&z0| {
                Ok(Loop {
                    label: format!("circle of radius 0.5 around the axis at z = {z0}"),
                    path: circle(&[0.0, 0.0, z0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.5)?,
                    expected: Sign::Minus,
                })
            })
            .collect::<Result<_, VerifyError>>()?,
        Construction::Pullback { map, base } => match pullback_loops(map, base)? {
            Some(l) => l,
            None => return Ok(None),
        },
    }))
}

pub(super) fn run(form: &Z2Form, settings: &Settings) -> Result<Option<Vec<Check>>, VerifyError> {
    let Some(loops) = loops_for(form, settings)? else {
        return Ok(None);
    };
    let mut sign_ok = 0;
    let mut stable = 0;
    let mut oracle_ok = 0;
    let mut lines = Vec::new();
    for lp in &loops {
        let sign = monodromy(form, &lp.path)?;
        let refined = monodromy(form, &lp.path.refined(2))?;
        let values: Vec<Cx> = lp.path.refined(ORACLE_REFINEMENT).points().map(|x| form.value(x)).collect();
        let oracle = if winding_number(&values) % 2 == 0 { Sign::Plus } else { Sign::Minus };
        sign_ok += usize::from(sign == lp.expected);
        stable += usize::from(sign == refined);
        oracle_ok += usize::from(sign == oracle);
        lines.push(format!("{}: {sign} (expected {})", lp.label, lp.expected));
    }
    let n = loops.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let detail = lines.join("; ");
    let parts = vec![
        Check::new("meridian-signs", None, n > 0 && sign_ok == n, frac(sign_ok), "= 1")
            .metric("loops", n as f64)
            .detail(detail),
        Check::new("refinement-stability", None, n > 0 && stable == n, frac(stable), "= 1")
            .detail("sign unchanged with every segment split in two"),
        Check::new("winding-oracle", None, n > 0 && oracle_ok == n, frac(oracle_ok), "= 1")
            .detail(format!("sign equals (-1)^winding of h, {ORACLE_REFINEMENT}x refined loop")),
    ];
    let mut checks = vec![Check::summary("monodromy", 3, &parts)];
    checks.extend(parts);
    Ok(Some(checks))
}
