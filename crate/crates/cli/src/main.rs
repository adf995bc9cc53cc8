//! `singasym`: batch front-end for the regularized-integral, SAL and
//! push-forward engines.
//!
//! Exit codes: 0 success, 2 invalid spec, 3 numerical failure, 4 failed
//! hypothesis diagnostics (the report is still written), 1 failed selftest.

mod engine;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use engine::{run_spec, Outcome, Overrides, Row, Status};
use spec::{parse_grid, ProblemSpec};

#[derive(Parser)]
#[command(name = "singasym", version, about = "Regularized integrals, singular asymptotics and push-forwards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one JSON problem spec and write its report.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the acceptance criteria, and optionally every spec in a directory.
    Selftest {
        /// Only criteria whose name, and specs whose kind, contains NAME.
        #[arg(long, value_name = "NAME")]
        filter: Option<String>,
        /// Directory of JSON specs to run after the criteria.
        #[arg(long, value_name = "DIR")]
        specs: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Args, Clone, Default)]
struct RunFlags {
    /// Directory for reports (default: next to the spec).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Quadrature tolerance, absolute and relative.
    #[arg(long, value_name = "TOL")]
    precision: Option<f64>,
    /// Truncation: SAL order, prediction order or index-set bound.
    #[arg(long, value_name = "N")]
    truncate: Option<f64>,
    /// Sample grid "a:b:points:geometric" or "a:b:points:linear".
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,
    /// Write only the JSON report and print it; no CSV, no table.
    #[arg(long)]
    json_only: bool,
}

impl RunFlags {
    fn overrides(&self) -> Result<Overrides, String> {
        Ok(Overrides {
            precision: self.precision,
            truncate: self.truncate,
            grid: self.grid.as_deref().map(parse_grid).transpose()?,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { spec, flags } => run(&spec, &flags, true),
        Command::Selftest { filter, specs, flags } => selftest(filter.as_deref(), specs.as_deref(), &flags),
    };
    ExitCode::from(code)
}

fn load(path: &Path) -> Result<ProblemSpec, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn fixed(v: f64) -> String {
    format!("{v:>24.16e}")
}

fn write_csv(path: &Path, rows: &[Row]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let mut put = |rec: &[String]| w.write_record(rec).map_err(|e| format!("{}: {e}", path.display()));
    put(&["t", "value", "prediction", "residual"].map(|h| format!("{h:>24}")))?;
    for r in rows {
        put(&[fixed(r.t), fixed(r.value), fixed(r.prediction), fixed(r.residual)])?;
    }
    w.flush().map_err(|e| format!("{}: {e}", path.display()))
}

fn print_table(kind: &str, outcome: &Outcome) {
    println!("{kind}: {}", outcome.status.label());
    if !outcome.rows.is_empty() {
        println!("{:>14} {:>24} {:>24} {:>12}", "t", "value", "prediction", "residual");
        for r in &outcome.rows {
            println!("{:>14.6e} {:>24.16e} {:>24.16e} {:>12.3e}", r.t, r.value, r.prediction, r.residual);
        }
    } else if !outcome.result.is_null() {
        println!("{}", render(&outcome.result).trim_end());
    }
}

/// Runs one spec; returns the exit code and writes the artifacts.
fn run(path: &Path, flags: &RunFlags, show: bool) -> u8 {
    let spec = match load(path) {
        Ok(s) => s,
        Err(m) => {
            eprintln!("error: {m}");
            return Status::Validation as u8;
        }
    };
    let outcome = match flags.overrides() {
        Ok(o) => run_spec(&spec, &o),
        Err(m) => Outcome::invalid(m),
    };
    let kind = spec.kind.name();
    if let Some(m) = &outcome.message {
        eprintln!("error ({}): {m}", outcome.status.label());
    }
    let mut report = json!({
        "kind": kind,
        "status": outcome.status.label(),
        "exitCode": outcome.status as u8,
        "result": outcome.result,
    });
    if let Some(m) = &outcome.message {
        report["message"] = json!(m);
    }
    let dir = flags.out.clone().unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = path.file_stem().map_or_else(|| "spec".into(), |s| s.to_string_lossy().into_owned());
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return Status::Validation as u8;
    }
    let text = render(&report);
    let json_path = dir.join(format!("{stem}.report.json"));
    if let Err(e) = fs::write(&json_path, &text) {
        eprintln!("error: cannot write {}: {e}", json_path.display());
        return Status::Validation as u8;
    }
    if flags.json_only {
        if show {
            print!("{text}");
        }
    } else {
        if !outcome.rows.is_empty() {
            if let Err(m) = write_csv(&dir.join(format!("{stem}.csv")), &outcome.rows) {
                eprintln!("error: {m}");
                return Status::Validation as u8;
            }
        }
        if show {
            print_table(kind, &outcome);
        }
    }
    outcome.status as u8
}

fn selftest(filter: Option<&str>, specs: Option<&Path>, flags: &RunFlags) -> u8 {
    let results = sing_asym::acceptance::run(filter);
    for r in &results {
        println!("{}", r.line());
    }
    let mut code = if results.iter().all(|r| r.passed) { 0 } else { 1 };
    let Some(dir) = specs else {
        return code;
    };
    let mut paths: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".report.json"))
            .collect(),
        Err(e) => {
            eprintln!("error: cannot read spec directory {}: {e}", dir.display());
            return Status::Validation as u8;
        }
    };
    paths.sort();
    for p in paths {
        // specs that fail to load are always run so the failure is reported
        if let (Some(f), Ok(spec)) = (filter, load(&p)) {
            if !spec.kind.name().contains(f) {
                continue;
            }
        }
        let c = run(&p, flags, false);
        println!("[{}] spec {}", if c == 0 { "PASS" } else { "FAIL" }, p.display());
        if c != 0 && (code == 0 || c == Status::Validation as u8) {
            code = c;
        }
    }
    code
}
