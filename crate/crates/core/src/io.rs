//! CSV point data, OBJ polylines and the `export` artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::branch::{BranchFunction, Cx, Polyline};
use crate::catalogue::{sample_sigma, Construction, FormError, Window, Z2Form};
use crate::descriptor::{Built, Descriptor, SchemaError};
use crate::morphisms::{project_to_r3, Fiber, MorphismError};
use crate::sun::{extract_a1, default_rings, harmonic_section, SunConfig, SunError, ZonalPolynomial};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("cannot export {what} for descriptor kind `{kind}`")]
    Unsupported { what: &'static str, kind: &'static str },
    #[error("unknown export target `{0}` (expected sigma, fiber or field)")]
    UnknownTarget(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Sun(#[from] SunError),
}

fn file_err(path: &Path, e: impl ToString) -> IoError {
    IoError::File { path: path.to_path_buf(), message: e.to_string() }
}

fn csv_err(path: &Path, e: impl ToString) -> IoError {
    IoError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

/// Writes rows under the header `x0,x1,...`.
pub fn write_points_csv(path: &Path, dim: usize, points: &[Vec<f64>]) -> Result<(), IoError> {
    let header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    write_csv(path, &header, points.iter().map(|p| p.as_slice()))
}

fn write_csv<'a>(path: &Path, header: &[String], rows: impl Iterator<Item = &'a [f64]>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| file_err(path, e))
}

/// Reads a polyline written as CSV with a header row `x0,x1,...`.
pub fn read_polyline_csv(path: &Path, closed: bool) -> Result<Polyline, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let dim = r.headers().map_err(|e| csv_err(path, e))?.len();
    let mut coords = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for field in rec.iter() {
            coords.push(field.trim().parse::<f64>().map_err(|e| csv_err(path, format!("`{field}`: {e}")))?);
        }
    }
    Polyline::from_flat(dim, coords, closed).map_err(|e| csv_err(path, e))
}

/// A closed polyline in R^3 as OBJ vertices and one line element.
pub fn write_obj_polyline(path: &Path, curve: &Polyline) -> Result<(), IoError> {
    let mut out = String::new();
    for p in curve.points() {
        out.push_str(&format!("v {:e} {:e} {:e}\n", p[0], p[1], p[2]));
    }
    out.push('l');
    for i in 1..=curve.len() {
        out.push_str(&format!(" {i}"));
    }
    if curve.is_closed() {
        out.push_str(" 1");
    }
    out.push('\n');
    fs::write(path, out).map_err(|e| file_err(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportTarget {
    Sigma,
    Fiber,
    Field,
}

impl ExportTarget {
    pub fn name(self) -> &'static str {
        match self {
            ExportTarget::Sigma => "sigma",
            ExportTarget::Fiber => "fiber",
            ExportTarget::Field => "field",
        }
    }
}

impl FromStr for ExportTarget {
    type Err = IoError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sigma" => Ok(ExportTarget::Sigma),
            "fiber" => Ok(ExportTarget::Fiber),
            "field" => Ok(ExportTarget::Field),
            _ => Err(IoError::UnknownTarget(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportOptions {
    /// Sample count for sigma, vertex count for fibers, points per axis for
    /// fields.
    pub grid: Option<usize>,
    /// Sun solver resolution.
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportSummary {
    pub target: String,
    pub files: Vec<String>,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

pub const DEFAULT_SIGMA_POINTS: usize = 2000;
pub const DEFAULT_FIBER_VERTICES: usize = 1024;
/// Base point of the exported fiber in the chart of `S^2`.
pub const FIBER_BASE: Cx = Cx::new(0.6, 0.3);

pub fn export(
    descriptor: &Descriptor,
    target: ExportTarget,
    dir: &Path,
    options: &ExportOptions,
) -> Result<ExportSummary, IoError> {
    let built = descriptor.build()?;
    fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
    let unsupported = IoError::Unsupported { what: target.name(), kind: descriptor.kind() };
    match (target, built) {
        (ExportTarget::Sigma, Built::Form(form)) => export_sigma(&form, dir, options).map(|s| s.ok_or(unsupported))?,
        (ExportTarget::Fiber, Built::Fibration { p, q }) => export_fiber(p, q, dir, options),
        (ExportTarget::Field, Built::Sun(config)) => export_field(descriptor, config, dir, options),
        _ => Err(unsupported),
    }
}

fn export_sigma(form: &Z2Form, dir: &Path, options: &ExportOptions) -> Result<Option<ExportSummary>, IoError> {
    let count = options.grid.unwrap_or(DEFAULT_SIGMA_POINTS);
    let dim = form.dim();
    let points: Vec<Vec<f64>> = match form.construction() {
        Construction::ReHPower { h, .. } => sample_sigma(h, &Window::cube(dim, 2.0), count)?
            .into_iter()
            .flat_map(|c| c.points)
            .collect(),
        Construction::PlanarSqrt { .. } | Construction::QuadraticDifferentialSqrt { .. } => match form.branching_locus() {
            crate::catalogue::BranchingLocus::Points(pts) => pts.iter().map(|r| vec![r.re, r.im]).collect(),
            _ => unreachable!(),
        },
        Construction::AxialProduct { .. } => (0..count.max(2))
            .map(|i| vec![0.0, 0.0, -2.0 + 4.0 * i as f64 / (count.max(2) - 1) as f64])
            .collect(),
        Construction::Pullback { .. } => return Ok(None),
    };
    let max_residual = points.iter().map(|x| form.value(x).norm()).fold(0.0, f64::max);
    let path = dir.join("sigma.csv");
    write_points_csv(&path, dim, &points)?;
    Ok(Some(ExportSummary {
        target: "sigma".into(),
        files: vec![path.display().to_string()],
        points: points.len(),
        max_residual: Some(max_residual),
    }))
}

fn export_fiber(p: u32, q: u32, dir: &Path, options: &ExportOptions) -> Result<ExportSummary, IoError> {
    let n = options.grid.unwrap_or(DEFAULT_FIBER_VERTICES);
    let fiber = Fiber::over(p, q, FIBER_BASE)?;
    let curve = fiber.to_polyline(n)?;
    // Projected from a point of the fiber over the antipode of the base.
    let (a, b) = Fiber::over(p, q, -FIBER_BASE / FIBER_BASE.norm_sqr())?.at(0.0);
    let projected = project_to_r3(&curve, [a.re, a.im, b.re, b.im])?;
    let csv_path = dir.join("fiber.csv");
    let obj_path = dir.join("fiber.obj");
    let points: Vec<Vec<f64>> = curve.points().map(|x| x.to_vec()).collect();
    write_points_csv(&csv_path, 4, &points)?;
    write_obj_polyline(&obj_path, &projected)?;
    Ok(ExportSummary {
        target: "fiber".into(),
        files: vec![csv_path.display().to_string(), obj_path.display().to_string()],
        points: n,
        max_residual: None,
    })
}

fn export_field(
    descriptor: &Descriptor,
    mut config: SunConfig,
    dir: &Path,
    options: &ExportOptions,
) -> Result<ExportSummary, IoError> {
    if let Some(n) = options.resolution {
        config.resolution = n;
    }
    let grid = config.grid()?;
    let chi = config.cutoff()?;
    let per_axis = options.grid.unwrap_or(grid.n_mu() + 1).max(2);
    let stride_mu = grid.n_mu().div_ceil(per_axis - 1).max(1);
    let stride_nu = grid.n_nu().div_ceil(per_axis).max(1);
    let header: Vec<String> = ["mu", "nu", "s", "x3", "u"].iter().map(|s| s.to_string()).collect();
    let mut files = Vec::new();
    let mut sidecar_fields = Vec::new();
    let mut rows_written = 0;
    let rings = default_rings(&grid);
    for &k in &config.degrees {
        let u = harmonic_section(&grid, &ZonalPolynomial::single(k)?, &chi)?;
        let a1 = extract_a1(&grid, &u, &rings)?;
        let mut rows = Vec::new();
        for i in (0..=grid.n_mu()).step_by(stride_mu) {
            for j in (0..grid.n_nu()).step_by(stride_nu) {
                let (s, x3) = grid.physical(i, j);
                rows.push([grid.mu(i), grid.nu(j), s, x3, u.at(i, j)]);
            }
        }
        let path = dir.join(format!("field_k{k}.csv"));
        write_csv(&path, &header, rows.iter().map(|r| r.as_slice()))?;
        rows_written += rows.len();
        sidecar_fields.push(json!({
            "degree": k,
            "file": path.file_name().map(|f| f.to_string_lossy().into_owned()),
            "rows": rows.len(),
            "a1_plus": a1.a_plus,
            "a1_minus": a1.a_minus,
        }));
        files.push(path.display().to_string());
    }
    let sidecar = json!({
        "descriptor": descriptor.to_value(),
        "config": config,
        "columns": header,
        "coordinates": "mu + i nu = acosh(s + i x3), s = distance to the axis; the sheets are mu > 0 and mu < 0; mu at nodes, nu at cell centers",
        "n_mu": grid.n_mu(),
        "n_nu": grid.n_nu(),
        "h_mu": grid.h_mu(),
        "h_nu": grid.h_nu(),
        "stride": [stride_mu, stride_nu],
        "fields": sidecar_fields,
    });
    let side = dir.join("field.json");
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    fs::write(&side, text).map_err(|e| file_err(&side, e))?;
    files.push(side.display().to_string());
    Ok(ExportSummary { target: "field".into(), files, points: rows_written, max_residual: None })
}
