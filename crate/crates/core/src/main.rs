use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use z2harm::descriptor::Descriptor;
use z2harm::io::{export, ExportOptions, ExportTarget};
use z2harm::verify::{run_suite, Settings, Suite, Tolerances};

/// Explicit Z2 harmonic functions and 1-forms.
#[derive(Parser)]
#[command(name = "z2harm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a descriptor and print it with defaults filled in.
    Construct {
        /// Descriptor file, or inline JSON.
        #[arg(long)]
        spec: String,
        /// Directory for descriptor.json instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named invariant suite and print the JSON report.
    Verify {
        #[arg(long)]
        spec: String,
        /// harmonicity, monodromy, vanishing-order, topology, harmonic-morphism or sun.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Tolerance override `name=value`; repeatable.
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tol: Vec<String>,
        /// Directory for report.json instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sample points for point sweeps.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Sun solver resolution.
        #[arg(long)]
        resolution: Option<usize>,
        /// Add wall-clock checks (the report is then not byte-stable).
        #[arg(long)]
        timing: bool,
    },
    /// Write sigma, fiber or field artifacts.
    Export {
        #[arg(long)]
        spec: String,
        /// sigma, fiber or field.
        #[arg(long)]
        what: String,
        #[arg(long)]
        out: PathBuf,
        /// Sample count (sigma), vertex count (fiber) or points per axis (field).
        #[arg(long)]
        grid: Option<usize>,
        /// Sun solver resolution.
        #[arg(long)]
        resolution: Option<usize>,
    },
}

/// Exit 1: a check failed. Exit 2: schema, usage or I/O error.
enum Failure {
    Check(String),
    Input(String),
}

fn load(spec: &str) -> Result<Descriptor, Failure> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        fs::read_to_string(spec).map_err(|e| Failure::Input(format!("{spec}: {e}")))?
    };
    Descriptor::from_json(&text).map_err(|e| Failure::Input(format!("{e}")))
}

fn emit(text: &str, out: Option<&Path>, name: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Construct { spec, out } => {
            let d = load(&spec)?;
            d.build().map_err(|e| Failure::Input(format!("{e}")))?;
            let mut text = d.to_json_pretty();
            text.push('\n');
            emit(&text, out.as_deref(), "descriptor.json")
        }
        Command::Verify { spec, suite, seed, tol, out, points, resolution, timing } => {
            let d = load(&spec)?;
            let suite: Suite = suite.parse().map_err(|e| Failure::Input(format!("{e}")))?;
            let mut tolerances = Tolerances::default();
            for t in &tol {
                tolerances.apply(t).map_err(|e| Failure::Input(format!("{e}")))?;
            }
            let settings = Settings { seed, tolerances, points, resolution, timing };
            let report = run_suite(&d, suite, &settings).map_err(|e| Failure::Input(format!("{e}")))?;
            emit(&report.to_json(), out.as_deref(), "report.json")?;
            match report.first_failure() {
                Some(c) => Err(Failure::Check(format!(
                    "check `{}` failed: value {:e}, required {}",
                    c.name, c.value, c.bound
                ))),
                None => Ok(()),
            }
        }
        Command::Export { spec, what, out, grid, resolution } => {
            let d = load(&spec)?;
            let target: ExportTarget = what.parse().map_err(|e| Failure::Input(format!("{e}")))?;
            let summary = export(&d, target, &out, &ExportOptions { grid, resolution })
                .map_err(|e| Failure::Input(format!("{e}")))?;
            let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            text.push('\n');
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
