//! Named invariant suites run against a descriptor, with seeded sampling and
//! JSON reports that are byte-stable for a fixed seed.

mod fd;
mod harmonicity;
mod monodromy;
mod morphism;
mod sampling;
mod sun;
mod topology;
mod vanishing;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::branch::BranchError;
use crate::catalogue::FormError;
use crate::descriptor::{Built, Descriptor, SchemaError};
use crate::morphisms::MorphismError;
use crate::sun::SunError;

pub use fd::{central_gradient, laplacian, winding_number};
pub use sampling::SigmaModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Harmonicity,
    Monodromy,
    VanishingOrder,
    Topology,
    HarmonicMorphism,
    Sun,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Harmonicity,
        Suite::Monodromy,
        Suite::VanishingOrder,
        Suite::Topology,
        Suite::HarmonicMorphism,
        Suite::Sun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Harmonicity => "harmonicity",
            Suite::Monodromy => "monodromy",
            Suite::VanishingOrder => "vanishing-order",
            Suite::Topology => "topology",
            Suite::HarmonicMorphism => "harmonic-morphism",
            Suite::Sun => "sun",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("suite `{suite}` does not apply to descriptor kind `{kind}`")]
    Incompatible { suite: &'static str, kind: &'static str },
    #[error("unknown tolerance `{0}`")]
    UnknownTolerance(String),
    #[error("malformed tolerance `{0}` (expected name=value)")]
    MalformedTolerance(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Sun(#[from] SunError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error("sampling found only {found} of {wanted} admissible points")]
    TooFewPoints { found: usize, wanted: usize },
}

/// Named numeric thresholds; `--tol name=value` overrides a default.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("richardson_lo", 3.4),
    ("richardson_hi", 4.6),
    ("gradient_rel", 1e-4),
    ("sigma_distance", 0.1),
    ("slope", 0.05),
    ("hausdorff", 1e-9),
    ("homogeneity", 1e-8),
    ("hopf_link", 0.05),
    ("torus_link", 0.1),
    ("tube", 0.2),
    ("lb_order_lo", 1.8),
    ("lb_order_hi", 2.2),
    ("cross_oracle", 1e-6),
    ("manufactured_order", 1.8),
    ("superposition", 1e-4),
    ("resolution_shift", 0.02),
    ("truncation_shift", 0.02),
    ("cutoff_shift", 0.02),
    ("gradient_shift", 0.02),
    ("reduction", 10.0),
    ("decay_slope", 1.4),
    ("friedrichs_ratio", 2.0),
    ("axisymmetry", 1e-8),
    ("runtime_s", 300.0),
];

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { values: DEFAULT_TOLERANCES.iter().copied().collect() }
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self.values.get(name).unwrap_or_else(|| panic!("tolerance `{name}` has no default"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), VerifyError> {
        let key = DEFAULT_TOLERANCES
            .iter()
            .map(|(k, _)| *k)
            .find(|k| *k == name)
            .ok_or_else(|| VerifyError::UnknownTolerance(name.to_string()))?;
        self.values.insert(key, value);
        Ok(())
    }

    /// Parses `name=value`.
    pub fn apply(&mut self, spec: &str) -> Result<(), VerifyError> {
        let (name, value) = spec.split_once('=').ok_or_else(|| VerifyError::MalformedTolerance(spec.to_string()))?;
        let v: f64 = value.trim().parse().map_err(|_| VerifyError::MalformedTolerance(spec.to_string()))?;
        self.set(name.trim(), v)
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        DEFAULT_TOLERANCES.iter().map(|(k, _)| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Sample points for point sweeps.
    pub points: usize,
    /// Overrides the Sun resolution.
    pub resolution: Option<usize>,
    /// Adds wall-clock checks (reports are then no longer byte-stable).
    pub timing: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { seed: 1, tolerances: Tolerances::default(), points: 200, resolution: None, timing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check belongs to, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub passed: bool,
    pub value: f64,
    pub bound: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Plain decimal for moderate magnitudes, scientific otherwise.
pub(crate) fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl Check {
    pub fn new(name: &str, criterion: Option<u8>, passed: bool, value: f64, bound: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            criterion,
            passed,
            value,
            bound: bound.into(),
            metrics: BTreeMap::new(),
            detail: None,
        }
    }

    /// Passes when `value <= max`.
    pub fn at_most(name: &str, criterion: Option<u8>, value: f64, max: f64) -> Self {
        Check::new(name, criterion, value <= max, value, format!("<= {}", fmt_num(max)))
    }

    /// Passes when `value >= min`.
    pub fn at_least(name: &str, criterion: Option<u8>, value: f64, min: f64) -> Self {
        Check::new(name, criterion, value >= min, value, format!(">= {}", fmt_num(min)))
    }

    /// Passes when `lo <= value <= hi`.
    pub fn within(name: &str, criterion: Option<u8>, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(name, criterion, value >= lo && value <= hi, value, format!("[{}, {}]", fmt_num(lo), fmt_num(hi)))
    }

    /// The single criterion-level check over several detail checks: passes
    /// when all of them pass; the value is the number that fail.
    pub fn summary(name: &str, criterion: u8, parts: &[Check]) -> Self {
        let failing: Vec<&str> = parts.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let names: Vec<&str> = parts.iter().map(|c| c.name.as_str()).collect();
        let detail = if failing.is_empty() {
            format!("all of: {}", names.join(", "))
        } else {
            format!("failing: {}", failing.join(", "))
        };
        Check::new(name, Some(criterion), !parts.is_empty() && failing.is_empty(), failing.len() as f64, "= 0 failing")
            .detail(detail)
    }

    pub fn metric(mut self, key: &str, v: f64) -> Self {
        self.metrics.insert(key.to_string(), v);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub descriptor: serde_json::Value,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn run_suite(descriptor: &Descriptor, suite: Suite, settings: &Settings) -> Result<VerificationReport, VerifyError> {
    let built = descriptor.build()?;
    let incompatible = || VerifyError::Incompatible { suite: suite.name(), kind: descriptor.kind() };
    let checks = match (suite, &built) {
        (Suite::Harmonicity, Built::Form(f)) => harmonicity::run(f, settings)?,
        (Suite::Monodromy, Built::Form(f)) => monodromy::run(f, settings)?,
        (Suite::VanishingOrder, Built::Form(f)) => vanishing::run(f, settings)?,
        (Suite::Topology, Built::Fibration { p, q }) => topology::run(*p, *q, settings)?,
        (Suite::HarmonicMorphism, Built::Fibration { p, q }) => morphism::run(*p, *q, settings)?,
        (Suite::Sun, Built::Sun(config)) => {
            let mut config = config.clone();
            if let Some(n) = settings.resolution {
                config.resolution = n;
            }
            sun::run(&config, settings)?
        }
        _ => return Err(incompatible()),
    };
    let checks = match checks {
        Some(c) => c,
        None => return Err(incompatible()),
    };
    Ok(VerificationReport {
        suite: suite.name().to_string(),
        descriptor: descriptor.to_value(),
        seed: settings.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply("slope=0.1").unwrap();
        assert_eq!(t.get("slope"), 0.1);
        assert_eq!(t.apply("nope=1"), Err(VerifyError::UnknownTolerance("nope".into())));
        assert!(matches!(t.apply("slope"), Err(VerifyError::MalformedTolerance(_))));
        assert!(matches!(t.apply("slope=abc"), Err(VerifyError::MalformedTolerance(_))));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("laplace".parse::<Suite>().is_err());
    }

    #[test]
    fn incompatible_suite() {
        let d = Descriptor::from_json(r#"{"kind":"hopf"}"#).unwrap();
        let err = run_suite(&d, Suite::Harmonicity, &Settings::default()).unwrap_err();
        assert!(matches!(err, VerifyError::Incompatible { suite: "harmonicity", kind: "hopf" }));
        let s = Descriptor::from_json(r#"{"kind":"seifert","p":2,"q":3}"#).unwrap();
        assert!(run_suite(&s, Suite::HarmonicMorphism, &Settings::default()).is_err());
    }

    #[test]
    fn zw_monodromy_report() {
        let d = Descriptor::from_json(r#"{"kind":"node","a":0,"b":0,"c":0}"#).unwrap();
        let r = run_suite(&d, Suite::Monodromy, &Settings::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.checks.iter().filter(|c| c.criterion == Some(3)).count(), 1);
        let signs = r.checks.iter().find(|c| c.name == "meridian-signs").unwrap();
        let detail = signs.detail.as_deref().unwrap();
        assert!(detail.contains("{z = b}: -1") && detail.contains("{w = c}: -1"), "{detail}");
    }

    #[test]
    fn reports_are_deterministic() {
        let d = Descriptor::from_json(r#"{"kind":"ramified","a":1}"#).unwrap();
        let s = Settings { points: 20, ..Settings::default() };
        let a = run_suite(&d, Suite::Harmonicity, &s).unwrap().to_json();
        let b = run_suite(&d, Suite::Harmonicity, &s).unwrap().to_json();
        assert_eq!(a, b);
    }
}
