//! JSON descriptors: `{"kind": "...", ...fields}`.
//!
//! Complex numbers are written either as a real number or as `[re, im]`.
//! Polynomial coefficients are listed in ascending order of degree.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::branch::{Cx, HalfPower};
use crate::catalogue::{DefiningFunction, FormError, UnivariatePolynomial, Z2Form};
use crate::morphisms::SmoothMap;
use crate::sun::{OuterBoundary, Smoothstep, SunConfig};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("schema error at {path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: &str, message: impl Into<String>) -> Self {
        SchemaError { path: if path.is_empty() { ".".into() } else { path.into() }, message: message.into() }
    }
}

/// A complex number in a descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CNum(pub Cx);

impl Serialize for CNum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for CNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Real(f64),
            Pair([f64; 2]),
        }
        match Raw::deserialize(d).map_err(|_| serde::de::Error::custom("expected a number or [re, im]"))? {
            Raw::Real(re) => Ok(CNum(Complex64::new(re, 0.0))),
            Raw::Pair([re, im]) => Ok(CNum(Complex64::new(re, im))),
        }
    }
}

fn zero() -> CNum {
    CNum(Cx::new(0.0, 0.0))
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    #[serde(default = "zero")]
    pub a: CNum,
    #[serde(default = "zero")]
    pub b: CNum,
    #[serde(default = "zero")]
    pub c: CNum,
    #[serde(default = "one_u32")]
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamifiedSpec {
    pub a: CNum,
    #[serde(default = "one_u32")]
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesSpec {
    pub lines: Vec<(CNum, CNum)>,
    #[serde(default = "one_u32")]
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarSpec {
    pub p: Vec<CNum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticSpec {
    pub q: Vec<CNum>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxialSpec {
    #[serde(default = "one_u32")]
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeifertSpec {
    pub p: u32,
    pub q: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    Quintic,
    Cubic,
    Septic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Radiation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SunSpec {
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default = "default_r2")]
    pub r2: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: CutoffKind,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryKind,
}

fn default_degrees() -> Vec<u32> {
    SunConfig::default().degrees
}
fn default_resolution() -> usize {
    SunConfig::default().resolution
}
fn default_truncation() -> f64 {
    SunConfig::default().truncation
}
fn default_r1() -> f64 {
    SunConfig::default().r1
}
fn default_r2() -> f64 {
    SunConfig::default().r2
}
fn default_cutoff() -> CutoffKind {
    CutoffKind::Septic
}
fn default_boundary() -> BoundaryKind {
    BoundaryKind::Radiation
}

impl Default for SunSpec {
    fn default() -> Self {
        SunSpec {
            degrees: default_degrees(),
            resolution: default_resolution(),
            truncation: default_truncation(),
            r1: default_r1(),
            r2: default_r2(),
            cutoff: default_cutoff(),
            boundary: default_boundary(),
        }
    }
}

/// Map of a pullback: `{"kind": "hopf"}` is `(z, w) -> z / w`,
/// `{"kind": "seifert", "p", "q"}` is `z1^p / z2^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapDescriptor {
    Hopf,
    Seifert(SeifertSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Descriptor {
    Node(NodeSpec),
    Ramified(RamifiedSpec),
    Lines(LinesSpec),
    Planar(PlanarSpec),
    Quadratic(QuadraticSpec),
    Axial(AxialSpec),
    Pullback { map: MapDescriptor, base: Box<Descriptor> },
    Hopf,
    Seifert(SeifertSpec),
    Sun(SunSpec),
}

/// What a descriptor builds.
#[derive(Debug, Clone, PartialEq)]
pub enum Built {
    Form(Z2Form),
    Fibration { p: u32, q: u32 },
    Sun(SunConfig),
}

fn field_path(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

fn take_kind(value: Value, path: &str) -> Result<(String, Map<String, Value>), SchemaError> {
    let Value::Object(mut obj) = value else {
        return Err(SchemaError::new(path, "expected an object"));
    };
    let kind = match obj.remove("kind") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(SchemaError::new(&field_path(path, "kind"), "expected a string")),
        None => return Err(SchemaError::new(path, "missing field `kind`")),
    };
    Ok((kind, obj))
}

fn typed<T: DeserializeOwned>(obj: Map<String, Value>, path: &str) -> Result<T, SchemaError> {
    serde_path_to_error::deserialize(Value::Object(obj)).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." {
            path.to_string()
        } else if path.is_empty() {
            inner
        } else {
            format!("{path}.{inner}")
        };
        SchemaError::new(&full, e.inner().to_string())
    })
}

impl Descriptor {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let value: Value = serde_json::from_str(text).map_err(|e| SchemaError::new("", e.to_string()))?;
        Descriptor::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, SchemaError> {
        Descriptor::parse(value, "")
    }

    fn parse(value: Value, path: &str) -> Result<Self, SchemaError> {
        let (kind, mut obj) = take_kind(value, path)?;
        Ok(match kind.as_str() {
            "node" => Descriptor::Node(typed(obj, path)?),
            "ramified" => Descriptor::Ramified(typed(obj, path)?),
            "lines" => Descriptor::Lines(typed(obj, path)?),
            "planar" => Descriptor::Planar(typed(obj, path)?),
            "quadratic" => Descriptor::Quadratic(typed(obj, path)?),
            "axial" => Descriptor::Axial(typed(obj, path)?),
            "hopf" => {
                if let Some(k) = obj.keys().next() {
                    return Err(SchemaError::new(&field_path(path, k), "unknown field"));
                }
                Descriptor::Hopf
            }
            "seifert" => Descriptor::Seifert(typed(obj, path)?),
            "sun" => Descriptor::Sun(typed(obj, path)?),
            "pullback" => {
                let map_path = field_path(path, "map");
                let base_path = field_path(path, "base");
                let map = obj.remove("map").ok_or_else(|| SchemaError::new(path, "missing field `map`"))?;
                let base = obj.remove("base").ok_or_else(|| SchemaError::new(path, "missing field `base`"))?;
                if let Some(k) = obj.keys().next() {
                    return Err(SchemaError::new(&field_path(path, k), "unknown field"));
                }
                let (map_kind, map_obj) = take_kind(map, &map_path)?;
                let map = match map_kind.as_str() {
                    "hopf" => {
                        if let Some(k) = map_obj.keys().next() {
                            return Err(SchemaError::new(&field_path(&map_path, k), "unknown field"));
                        }
                        MapDescriptor::Hopf
                    }
                    "seifert" => MapDescriptor::Seifert(typed(map_obj, &map_path)?),
                    other => {
                        return Err(SchemaError::new(
                            &field_path(&map_path, "kind"),
                            format!("unknown map kind `{other}` (expected hopf or seifert)"),
                        ))
                    }
                };
                Descriptor::Pullback { map, base: Box::new(Descriptor::parse(base, &base_path)?) }
            }
            other => {
                return Err(SchemaError::new(&field_path(path, "kind"), format!("unknown kind `{other}`")));
            }
        })
    }

    /// Canonical JSON with defaults filled in.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("descriptor serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Descriptor::Node(_) => "node",
            Descriptor::Ramified(_) => "ramified",
            Descriptor::Lines(_) => "lines",
            Descriptor::Planar(_) => "planar",
            Descriptor::Quadratic(_) => "quadratic",
            Descriptor::Axial(_) => "axial",
            Descriptor::Pullback { .. } => "pullback",
            Descriptor::Hopf => "hopf",
            Descriptor::Seifert(_) => "seifert",
            Descriptor::Sun(_) => "sun",
        }
    }

    /// Validates and builds the described object.
    pub fn build(&self) -> Result<Built, SchemaError> {
        self.build_at("")
    }

    fn build_at(&self, path: &str) -> Result<Built, SchemaError> {
        let form_err = |field: &str, e: FormError| SchemaError::new(&field_path(path, field), e.to_string());
        let half = |k: u32| -> Result<HalfPower, SchemaError> {
            if k == 0 || k > 8 {
                return Err(SchemaError::new(&field_path(path, "k"), "k must be in 1..=8"));
            }
            Ok(HalfPower(k))
        };
        let poly = |field: &str, c: &[CNum]| -> Result<UnivariatePolynomial, SchemaError> {
            UnivariatePolynomial::new(c.iter().map(|v| v.0).collect())
                .map_err(|e| SchemaError::new(&field_path(path, field), e.to_string()))
        };
        Ok(match self {
            Descriptor::Node(s) => {
                Built::Form(Z2Form::re_h_power(DefiningFunction::node(s.a.0, s.b.0, s.c.0), half(s.k)?))
            }
            Descriptor::Ramified(s) => Built::Form(Z2Form::re_h_power(DefiningFunction::ramified(s.a.0), half(s.k)?)),
            Descriptor::Lines(s) => {
                let h = DefiningFunction::lines(s.lines.iter().map(|(a, b)| (a.0, b.0)).collect())
                    .map_err(|e| form_err("lines", e.into()))?;
                Built::Form(Z2Form::re_h_power(h, half(s.k)?))
            }
            Descriptor::Planar(s) => Built::Form(Z2Form::planar(poly("p", &s.p)?)),
            Descriptor::Quadratic(s) => Built::Form(Z2Form::quadratic_differential(poly("q", &s.q)?)),
            Descriptor::Axial(s) => Built::Form(Z2Form::axial(half(s.k)?)),
            Descriptor::Pullback { map, base } => {
                let map_path = field_path(path, "map");
                let m = match map {
                    MapDescriptor::Hopf => SmoothMap::hopf_chart(),
                    MapDescriptor::Seifert(s) => SmoothMap::seifert_chart(s.p, s.q)
                        .map_err(|e| SchemaError::new(&map_path, e.to_string()))?,
                };
                let Built::Form(b) = base.build_at(&field_path(path, "base"))? else {
                    return Err(SchemaError::new(&field_path(path, "base"), "base must be a form"));
                };
                Built::Form(Z2Form::pullback(m, b).map_err(|e| form_err("base", e))?)
            }
            Descriptor::Hopf => Built::Fibration { p: 1, q: 1 },
            Descriptor::Seifert(s) => {
                SmoothMap::seifert(s.p, s.q).map_err(|e| SchemaError::new(path, e.to_string()))?;
                Built::Fibration { p: s.p, q: s.q }
            }
            Descriptor::Sun(s) => {
                let config = s.to_config();
                config.cutoff().map_err(|e| SchemaError::new(&field_path(path, "r1"), e.to_string()))?;
                if let Some(k) = s.degrees.iter().find(|k| **k > crate::sun::MAX_DEGREE) {
                    return Err(SchemaError::new(&field_path(path, "degrees"), format!("degree {k} above 12")));
                }
                if s.degrees.is_empty() {
                    return Err(SchemaError::new(&field_path(path, "degrees"), "need at least one degree"));
                }
                if s.resolution < 16 || s.resolution % 4 != 0 {
                    return Err(SchemaError::new(
                        &field_path(path, "resolution"),
                        "resolution must be a multiple of 4, at least 16",
                    ));
                }
                if !(s.truncation > s.r2) {
                    return Err(SchemaError::new(&field_path(path, "truncation"), "truncation must exceed r2"));
                }
                Built::Sun(config)
            }
        })
    }
}

impl SunSpec {
    pub fn to_config(&self) -> SunConfig {
        SunConfig {
            degrees: self.degrees.clone(),
            resolution: self.resolution,
            truncation: self.truncation,
            r1: self.r1,
            r2: self.r2,
            cutoff: match self.cutoff {
                CutoffKind::Quintic => Smoothstep::Quintic,
                CutoffKind::Cubic => Smoothstep::Cubic,
                CutoffKind::Septic => Smoothstep::Septic,
            },
            boundary: match self.boundary {
                BoundaryKind::Dirichlet => OuterBoundary::Dirichlet,
                BoundaryKind::Radiation => OuterBoundary::Radiation,
            },
        }
    }
}
