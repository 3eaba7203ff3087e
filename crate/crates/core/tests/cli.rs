use std::fs;
use std::process::{Command, Output};

fn z2harm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_z2harm")).args(args).output().expect("binary runs")
}

const RAMIFIED: &str = r#"{"kind":"ramified","a":1}"#;

#[test]
fn construct_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = z2harm(&["construct", "--spec", RAMIFIED]);
    assert_eq!(out.status.code(), Some(0));
    let path = dir.path().join("d.json");
    fs::write(&path, &out.stdout).unwrap();
    let again = z2harm(&["construct", "--spec", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn schema_errors_exit_2_with_path() {
    let out = z2harm(&["construct", "--spec", r#"{"kind":"lines","lines":[[1,0],[0,"x"]]}"#]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lines[1][1]"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(z2harm(&["verify", "--spec", RAMIFIED, "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(z2harm(&["verify", "--spec", RAMIFIED, "--suite", "topology"]).status.code(), Some(2));
    assert_eq!(z2harm(&["verify", "--spec", "/no/such/file.json", "--suite", "harmonicity"]).status.code(), Some(2));
    assert_eq!(z2harm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_byte_stable() {
    let args = ["verify", "--spec", RAMIFIED, "--suite", "monodromy", "--seed", "7"];
    let a = z2harm(&args);
    let b = z2harm(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["seed"], 7);
}

#[test]
fn failing_check_exits_1() {
    let out = z2harm(&["verify", "--spec", RAMIFIED, "--suite", "vanishing-order", "--tol", "slope=1e-9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("FAIL: check `vanishing-slopes`"));
}

#[test]
fn report_written_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = z2harm(&[
        "verify", "--spec", RAMIFIED, "--suite", "harmonicity", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["suite"], "harmonicity");
}

#[test]
fn exports_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let sigma = z2harm(&["export", "--spec", r#"{"kind":"node","a":1}"#, "--what", "sigma", "--out", d, "--grid", "500"]);
    assert_eq!(sigma.status.code(), Some(0), "{}", String::from_utf8_lossy(&sigma.stderr));
    let csv = fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
    assert!(csv.starts_with("x0,x1,x2,x3"));

    let fiber = z2harm(&["export", "--spec", r#"{"kind":"hopf"}"#, "--what", "fiber", "--out", d, "--grid", "256"]);
    assert_eq!(fiber.status.code(), Some(0));
    assert!(dir.path().join("fiber.obj").exists());
    assert_eq!(fs::read_to_string(dir.path().join("fiber.csv")).unwrap().lines().count(), 257);

    let wrong = z2harm(&["export", "--spec", RAMIFIED, "--what", "fiber", "--out", d]);
    assert_eq!(wrong.status.code(), Some(2));
}
