//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are pinned here and compared with the library
//! defaults so a silent change of a default shows up as a failure.

use std::process::ExitCode;
use std::time::Instant;

use z2harm::descriptor::Descriptor;
use z2harm::verify::{run_suite, Check, Settings, Suite, Tolerances, VerificationReport};

const PINNED: &[(&str, f64)] = &[
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
    ("reduction", 10.0),
    ("decay_slope", 1.4),
    ("runtime_s", 300.0),
];

const ZW: &str = r#"{"kind":"node","a":0,"b":0,"c":0}"#;
const NODE: &str = r#"{"kind":"node","a":1,"b":0,"c":0}"#;
const LINES: &str = r#"{"kind":"lines","lines":[[1,0],[0,1],[1,1]]}"#;
const ZW_SQUARED: &str = r#"{"kind":"lines","lines":[[1,0],[1,0],[0,1],[0,1]]}"#;
const RAMIFIED: &str = r#"{"kind":"ramified","a":1}"#;
const AXIAL: &str = r#"{"kind":"axial"}"#;
const PLANAR: &str = r#"{"kind":"planar","p":[-0.5,1]}"#;
const HOPF: &str = r#"{"kind":"hopf"}"#;
const SEIFERT_23: &str = r#"{"kind":"seifert","p":2,"q":3}"#;
const SEIFERT_32: &str = r#"{"kind":"seifert","p":3,"q":2}"#;
const SUN: &str = r#"{"kind":"sun"}"#;

const SEED: u64 = 20240611;

struct Outcome {
    passed: bool,
    summary: String,
}

fn settings() -> Settings {
    Settings { seed: SEED, ..Settings::default() }
}

fn report(json: &str, suite: Suite, settings: &Settings) -> Result<VerificationReport, String> {
    let d = Descriptor::from_json(json).map_err(|e| e.to_string())?;
    run_suite(&d, suite, settings).map_err(|e| format!("{json} {suite}: {e}"))
}

/// The one check of `report` mapped to `criterion`.
fn criterion_check(report: &VerificationReport, criterion: u8) -> Result<Check, String> {
    let mut found = report.checks.iter().filter(|c| c.criterion == Some(criterion));
    match (found.next(), found.next()) {
        (Some(c), None) => Ok(c.clone()),
        (None, _) => Err(format!("{}: no check for criterion {criterion}", report.suite)),
        _ => Err(format!("{}: more than one check for criterion {criterion}", report.suite)),
    }
}

/// Runs `suite` on every descriptor and combines the criterion checks.
fn over(criterion: u8, suite: Suite, descriptors: &[&str]) -> Outcome {
    let s = settings();
    let mut passed = true;
    let mut parts = Vec::new();
    for d in descriptors {
        let kind = Descriptor::from_json(d).map(|x| x.kind()).unwrap_or("?");
        match report(d, suite, &s).and_then(|r| criterion_check(&r, criterion)) {
            Ok(c) => {
                passed &= c.passed;
                parts.push(format!("{kind}: {}={} ({})", c.name, fmt(c.value), c.bound));
                if !c.passed {
                    if let Some(detail) = &c.detail {
                        parts.push(format!("[{detail}]"));
                    }
                }
            }
            Err(e) => {
                passed = false;
                parts.push(e);
            }
        }
    }
    Outcome { passed, summary: parts.join("; ") }
}

fn fmt(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn tolerances_pinned() -> Outcome {
    let t = Tolerances::default();
    let off: Vec<String> = PINNED
        .iter()
        .filter(|(k, v)| t.get(k) != *v)
        .map(|(k, v)| format!("{k}: default {} but pinned {v}", t.get(k)))
        .collect();
    Outcome { passed: off.is_empty(), summary: if off.is_empty() { "defaults match".into() } else { off.join("; ") } }
}

fn sun() -> Outcome {
    let start = Instant::now();
    let r = report(SUN, Suite::Sun, &settings());
    let elapsed = start.elapsed().as_secs_f64();
    match r.and_then(|r| {
        let c = criterion_check(&r, 8)?;
        let metric = |name: &str| r.checks.iter().find(|c| c.name == name).map(|c| fmt(c.value)).unwrap_or_default();
        Ok((c, format!(
            "order={} superposition={} resolution_shift={} truncation_shift={} reduction={} slope={}",
            metric("manufactured-order"),
            metric("superposition"),
            metric("resolution-shift"),
            metric("truncation-shift"),
            metric("null-reduction"),
            metric("null-decay-slope"),
        )))
    }) {
        Ok((c, text)) => {
            let budget = PINNED.iter().find(|(k, _)| *k == "runtime_s").unwrap().1;
            Outcome {
                passed: c.passed && elapsed <= budget,
                summary: format!("{text} runtime={elapsed:.1}s (<= {budget}s){}", c.detail.map(|d| format!(" [{d}]")).unwrap_or_default()),
            }
        }
        Err(e) => Outcome { passed: false, summary: e },
    }
}

fn determinism() -> Outcome {
    let cases: [(&str, Suite, Settings); 4] = [
        (RAMIFIED, Suite::Harmonicity, settings()),
        (RAMIFIED, Suite::Monodromy, settings()),
        (SEIFERT_23, Suite::Topology, settings()),
        (SUN, Suite::Sun, Settings { resolution: Some(128), ..settings() }),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (d, suite, s) in &cases {
        let a = report(d, *suite, s).map(|r| r.to_json());
        let b = report(d, *suite, s).map(|r| r.to_json());
        let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        passed &= same;
        parts.push(format!("{suite}: {}", if same { "identical" } else { "differs" }));
    }
    Outcome { passed, summary: parts.join("; ") }
}

fn main() -> ExitCode {
    let pinned = tolerances_pinned();
    println!("{} tolerances: {}", if pinned.passed { "PASS" } else { "FAIL" }, pinned.summary);
    let criteria: Vec<(u8, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "harmonicity", Box::new(|| over(1, Suite::Harmonicity, &[ZW, NODE, LINES, RAMIFIED, AXIAL, PLANAR]))),
        (2, "gradient consistency", Box::new(|| over(2, Suite::Harmonicity, &[ZW, NODE, LINES, RAMIFIED, AXIAL, PLANAR]))),
        (3, "monodromy", Box::new(|| over(3, Suite::Monodromy, &[ZW, RAMIFIED, PLANAR, ZW_SQUARED]))),
        (4, "vanishing orders", Box::new(|| over(4, Suite::VanishingOrder, &[ZW, NODE, LINES, RAMIFIED, PLANAR, AXIAL]))),
        (5, "tangent cones", Box::new(|| over(5, Suite::VanishingOrder, &[LINES]))),
        (6, "topology", Box::new(|| over(6, Suite::Topology, &[HOPF, SEIFERT_23, SEIFERT_32]))),
        (7, "harmonic morphism", Box::new(|| over(7, Suite::HarmonicMorphism, &[HOPF]))),
        (8, "sun pipeline", Box::new(sun)),
        (9, "determinism", Box::new(determinism)),
    ];
    let mut all = pinned.passed;
    for (n, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        all &= o.passed;
        println!(
            "{} criterion {n} ({name}, {:.1}s): {}",
            if o.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.summary
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
