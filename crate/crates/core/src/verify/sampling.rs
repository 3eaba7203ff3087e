//! Distance to the branching set, seeded point sampling and locally
//! continued evaluation of a form near a base point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::branch::{as_c2, continue_branch, dist, BranchState, Cx, Polyline};
use crate::catalogue::{sample_sigma, Construction, DefiningFunction, FormError, Window, Z2Form};

use super::VerifyError;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The zero set of the tracked function, in a form that supports distance
/// queries.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaModel {
    /// Complex lines `a z + b w = 0` through the origin of C^2.
    Lines(Vec<(Cx, Cx)>),
    /// Points of the plane.
    Points(Vec<Cx>),
    /// The `z`-axis of R^3.
    ZAxis,
    /// `{z = b} u {w = c}`, the degenerate node.
    Axes { b: Cx, c: Cx },
    /// A curve in C^2 known through `h` and a point cloud.
    Implicit { h: DefiningFunction, cloud: Vec<Vec<f64>> },
}

impl SigmaModel {
    /// `None` for pullbacks.
    pub fn for_form(form: &Z2Form) -> Result<Option<SigmaModel>, FormError> {
        Ok(Some(match form.construction() {
            Construction::ReHPower { h, .. } => match h {
                DefiningFunction::ProductOfLines(lines) => SigmaModel::Lines(lines.clone()),
                DefiningFunction::Univariate(p) => SigmaModel::Points(p.roots()),
                DefiningFunction::Node { a, b, c } if a.norm() == 0.0 => SigmaModel::Axes { b: *b, c: *c },
                _ => {
                    let clouds = sample_sigma(h, &Window::cube(4, 2.5), 20_000)?;
                    SigmaModel::Implicit {
                        h: h.clone(),
                        cloud: clouds.into_iter().flat_map(|c| c.points).collect(),
                    }
                }
            },
            Construction::PlanarSqrt { p } | Construction::QuadraticDifferentialSqrt { q: p } => {
                SigmaModel::Points(p.roots())
            }
            Construction::AxialProduct { .. } => SigmaModel::ZAxis,
            Construction::Pullback { .. } => return Ok(None),
        }))
    }

    /// Distance from `x` to the set. Exact for lines, points and the axis;
    /// for implicit curves the smaller of the first-order estimate
    /// `|h| / |grad h|` and the distance to the cloud.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            SigmaModel::Lines(lines) => {
                let (z, w) = as_c2(x);
                lines
                    .iter()
                    .map(|(a, b)| (a * z + b * w).norm() / (a.norm_sqr() + b.norm_sqr()).sqrt())
                    .fold(f64::INFINITY, f64::min)
            }
            SigmaModel::Points(pts) => {
                pts.iter().map(|r| (Cx::new(x[0], x[1]) - r).norm()).fold(f64::INFINITY, f64::min)
            }
            SigmaModel::ZAxis => x[0].hypot(x[1]),
            SigmaModel::Axes { b, c } => {
                let (z, w) = as_c2(x);
                (z - b).norm().min((w - c).norm())
            }
            SigmaModel::Implicit { h, cloud } => {
                let (z, w) = as_c2(x);
                let (v, hz, hw) = h.eval_with_partials(z, w);
                let grad = (hz.norm_sqr() + hw.norm_sqr()).sqrt();
                let estimate = if grad > 0.0 { v.norm() / grad } else { f64::INFINITY };
                let sampled = cloud.iter().map(|p| dist(p, x)).fold(f64::INFINITY, f64::min);
                estimate.min(sampled)
            }
        }
    }
}

/// Half-width of the sampling box per domain dimension.
pub(crate) fn box_half_width(dim: usize) -> f64 {
    match dim {
        2 => 2.0,
        _ => 1.5,
    }
}

/// `count` uniform points of `[-half, half]^dim` at distance greater than
/// `min_distance` from the set.
pub(crate) fn sample_clear_points(
    model: &SigmaModel,
    dim: usize,
    count: usize,
    min_distance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>, VerifyError> {
    let half = box_half_width(dim);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count * 1000 {
        if out.len() == count {
            break;
        }
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-half..half)).collect();
        if model.distance(&x) > min_distance {
            out.push(x);
        }
    }
    if out.len() < count {
        return Err(VerifyError::TooFewPoints { found: out.len(), wanted: count });
    }
    Ok(out)
}

/// A form continued from a base point to nearby points along straight
/// segments.
pub(crate) struct Local<'a> {
    pub form: &'a Z2Form,
    pub state: BranchState,
}

impl<'a> Local<'a> {
    pub fn principal(form: &'a Z2Form, x: &[f64]) -> Result<Self, FormError> {
        Ok(Local { form, state: form.principal_state(x)? })
    }

    pub fn state_at(&self, y: &[f64]) -> Result<BranchState, FormError> {
        if y == self.state.at.as_slice() {
            return Ok(self.state.clone());
        }
        let path = Polyline::new(y.len(), vec![self.state.at.clone(), y.to_vec()], false)?;
        Ok(continue_branch(self.form, &path, &self.state)?)
    }

    pub fn f(&self, y: &[f64]) -> Result<f64, FormError> {
        self.form.eval_f(&self.state_at(y)?)
    }
}
