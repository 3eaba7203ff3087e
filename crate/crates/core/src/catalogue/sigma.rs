//! Point samples of the zero set `{h = 0}` inside a coordinate box.

use std::f64::consts::TAU;

use crate::branch::{from_c2, Cx};

use super::poly::{BivariatePolynomial, DefiningFunction, UnivariatePolynomial};
use super::FormError;

/// Points kept only when `|h|` is below this after polishing.
pub const SIGMA_RESIDUAL: f64 = 1e-9;

/// Axis-aligned box in real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    /// `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        Window { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }
}

/// Sampled points of one piece of the zero set. For a product of lines the
/// piece is the exact line `{a z + b w = 0}` and `line` records `(a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec<f64>>,
    pub line: Option<(Cx, Cx)>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples `{h = 0}` in `window` with roughly `count` points.
///
/// Lines through the origin are parameterized directly. Other kinds are
/// solved for `w` over a grid of `z` values and for `z` over a grid of `w`
/// values (companion-matrix roots, Newton-polished), which also catches
/// components of the form `{z = const}`.
pub fn sample_sigma(h: &DefiningFunction, window: &Window, count: usize) -> Result<Vec<PointCloud>, FormError> {
    if window.dim() != h.dim() {
        return Err(FormError::DimensionMismatch { expected: h.dim(), got: window.dim() });
    }
    let count = count.max(4);
    let clouds = match h {
        DefiningFunction::ProductOfLines(lines) => lines
            .iter()
            .map(|&(a, b)| PointCloud { points: sample_line(a, b, window, count), line: Some((a, b)) })
            .filter(|c| !c.is_empty())
            .collect(),
        DefiningFunction::Univariate(p) => {
            let points: Vec<Vec<f64>> = p
                .roots()
                .into_iter()
                .map(|r| vec![r.re, r.im])
                .filter(|x| window.contains(x))
                .collect();
            if points.is_empty() {
                vec![]
            } else {
                vec![PointCloud { points, line: None }]
            }
        }
        _ => {
            let table = h.to_bivariate().expect("bivariate kind");
            let per_axis = ((count as f64 / 2.0).sqrt().ceil() as usize).max(2);
            let mut points = solve_over_grid(h, &table, window, per_axis, false);
            points.extend(solve_over_grid(h, &table.transposed(), window, per_axis, true));
            if points.is_empty() {
                vec![]
            } else {
                vec![PointCloud { points, line: None }]
            }
        }
    };
    if clouds.is_empty() {
        return Err(FormError::EmptyIntersection);
    }
    Ok(clouds)
}

fn sample_line(a: Cx, b: Cx, window: &Window, count: usize) -> Vec<Vec<f64>> {
    // Direction (b, -a) / |(a, b)|; points t * dir for t in a polar grid.
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (dz, dw) = (b / n, -a / n);
    let reach = window.lo.iter().chain(&window.hi).fold(0.0_f64, |m, v| m.max(v.abs())) * 2.0;
    let rings = ((count as f64).sqrt().ceil() as usize).max(2);
    let spokes = count.div_ceil(rings).max(3);
    let mut out = Vec::new();
    for i in 0..rings {
        let r = reach * i as f64 / (rings - 1) as f64;
        let m = if i == 0 { 1 } else { spokes };
        for k in 0..m {
            let t = Cx::from_polar(r, TAU * k as f64 / m as f64);
            let x = from_c2(t * dz, t * dw);
            if window.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// Solves `table(s, t) = 0` for `t` over a grid of `s`; `swapped` means the
/// grid variable is `w`.
fn solve_over_grid(
    h: &DefiningFunction,
    table: &BivariatePolynomial,
    window: &Window,
    per_axis: usize,
    swapped: bool,
) -> Vec<Vec<f64>> {
    let (re_k, im_k) = if swapped { (2, 3) } else { (0, 1) };
    let mut out = Vec::new();
    for i in 0..per_axis {
        for j in 0..per_axis {
            let fr = i as f64 / (per_axis - 1) as f64;
            let fi = j as f64 / (per_axis - 1) as f64;
            let s = Cx::new(
                window.lo[re_k] + fr * (window.hi[re_k] - window.lo[re_k]),
                window.lo[im_k] + fi * (window.hi[im_k] - window.lo[im_k]),
            );
            let Ok(poly) = UnivariatePolynomial::new(table.in_w(s)) else {
                continue;
            };
            if poly.degree() == 0 {
                continue;
            }
            for t in poly.roots() {
                let (z, w) = if swapped { (t, s) } else { (s, t) };
                let x = from_c2(z, w);
                if !window.contains(&x) {
                    continue;
                }
                if h.eval(z, w).norm() < SIGMA_RESIDUAL {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// `Sigma` of a product of lines intersected with the sphere of radius `r`,
/// `n` points per line: the circles `r e^{i theta} (b, -a) / |(a, b)|`.
pub fn lines_on_sphere(lines: &[(Cx, Cx)], r: f64, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(lines.len() * n);
    for &(a, b) in lines {
        let m = (a.norm_sqr() + b.norm_sqr()).sqrt();
        for k in 0..n {
            let t = Cx::from_polar(r, TAU * k as f64 / n as f64);
            out.push(from_c2(t * b / m, -t * a / m));
        }
    }
    out
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_sided = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|x| q.iter().map(|y| crate::branch::dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::as_c2;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn max_residual(h: &DefiningFunction, clouds: &[PointCloud]) -> f64 {
        clouds
            .iter()
            .flat_map(|cl| cl.points.iter())
            .map(|x| {
                let (z, w) = as_c2(x);
                h.eval(z, w).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn axes_give_two_discs() {
        let h = DefiningFunction::node(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let clouds = sample_sigma(&h, &Window::cube(4, 1.0), 400).unwrap();
        let pts: Vec<_> = clouds.iter().flat_map(|c| c.points.iter()).collect();
        let on_z_axis = pts.iter().filter(|x| x[2] == 0.0 && x[3] == 0.0 && (x[0] != 0.0 || x[1] != 0.0)).count();
        let on_w_axis = pts.iter().filter(|x| x[0] == 0.0 && x[1] == 0.0 && (x[2] != 0.0 || x[3] != 0.0)).count();
        assert!(on_z_axis > 50 && on_w_axis > 50, "{on_z_axis} {on_w_axis}");
        assert_eq!(max_residual(&h, &clouds), 0.0);
    }

    #[test]
    fn smooth_conic_residual() {
        let h = DefiningFunction::node(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let clouds = sample_sigma(&h, &Window::cube(4, 2.0), 2000).unwrap();
        assert!(clouds[0].len() > 100);
        assert!(max_residual(&h, &clouds) < SIGMA_RESIDUAL);
    }

    #[test]
    fn ramified_cover_at_zero() {
        let h = DefiningFunction::ramified(c(1.0, 0.0));
        let w = Window { lo: vec![0.0, 0.0, -2.0, -2.0], hi: vec![0.0, 0.0, 2.0, 2.0] };
        let clouds = sample_sigma(&h, &w, 8).unwrap();
        let mut ws: Vec<f64> = clouds[0].points.iter().filter(|x| x[2] != 0.0).map(|x| x[2]).collect();
        ws.sort_by(f64::total_cmp);
        ws.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(ws.len(), 2);
        assert!((ws[0] + 1.0).abs() < 1e-12 && (ws[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window() {
        let h = DefiningFunction::node(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let w = Window::cube(4, 0.1);
        assert_eq!(sample_sigma(&h, &w, 100), Err(FormError::EmptyIntersection));
    }

    #[test]
    fn lines_are_exact() {
        let lines = vec![(c(1.0, 0.0), c(0.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.0), c(1.0, 0.0))];
        let h = DefiningFunction::lines(lines.clone()).unwrap();
        let clouds = sample_sigma(&h, &Window::cube(4, 1.0), 200).unwrap();
        assert_eq!(clouds.len(), 3);
        assert!(max_residual(&h, &clouds) < 1e-15);
        let unit = lines_on_sphere(&lines, 1.0, 64);
        let small: Vec<Vec<f64>> = lines_on_sphere(&lines, 1e-2, 64)
            .into_iter()
            .map(|x| x.iter().map(|v| v / 1e-2).collect())
            .collect();
        assert!(hausdorff(&unit, &small) < 1e-12);
    }
}
