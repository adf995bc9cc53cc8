use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singasym"))
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn run_spec(spec: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(spec).arg("--out").arg(out).args(extra).output().unwrap()
}

fn report(out: &Path, stem: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{stem}.report.json"))).unwrap()).unwrap()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn reginteg_of_exponential_is_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run_spec(&specs_dir().join("reginteg_exp.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(out.path(), "reginteg_exp");
    assert!((r["result"]["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(r["status"], "ok");
}

#[test]
fn indexset_push_of_the_product_model() {
    let out = tempfile::tempdir().unwrap();
    let o = run_spec(&specs_dir().join("indexset_xy.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(out.path(), "indexset_xy");
    let entries: Vec<(f64, u64)> = r["result"]["family"]["0"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_f64().unwrap(), e[2].as_u64().unwrap()))
        .collect();
    let expect: Vec<(f64, u64)> = (0..5).flat_map(|n| [(n as f64, 0), (n as f64, 1)]).collect();
    assert_eq!(entries, expect);
}

#[test]
fn pushforward_csv_matches_minus_log() {
    let out = tempfile::tempdir().unwrap();
    let o = run_spec(&specs_dir().join("pushforward_u0.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(out.path().join("pushforward_u0.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["t", "value", "prediction", "residual"]);
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[0].parse().unwrap();
        let v: f64 = rec[1].parse().unwrap();
        assert!((v + t.ln()).abs() <= 1e-8, "t = {t}: {v}");
        n += 1;
    }
    assert_eq!(n, 20);
    let r = report(out.path(), "pushforward_u0");
    let fit = &r["result"]["fit"]["coefficients"];
    assert!((fit[1].as_f64().unwrap() + 1.0).abs() < 1e-9, "{fit}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for spec in ["mellin_log_exp.json", "pushforward_u0.json", "sal_geometric.json"] {
        run_spec(&specs_dir().join(spec), a.path(), &[]);
        run_spec(&specs_dir().join(spec), b.path(), &[]);
        let stem = spec.trim_end_matches(".json");
        let name = format!("{stem}.report.json");
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{spec}");
    }
}

#[test]
fn json_keys_are_sorted() {
    let out = tempfile::tempdir().unwrap();
    run_spec(&specs_dir().join("reginteg_exp.json"), out.path(), &[]);
    let text = fs::read_to_string(out.path().join("reginteg_exp.report.json")).unwrap();
    let top: Vec<usize> = ["\"exitCode\"", "\"kind\"", "\"result\"", "\"status\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(top.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn hypothesis_failure_still_writes_the_report() {
    let out = tempfile::tempdir().unwrap();
    let o = run_spec(&specs_dir().join("sal_nonintegrable.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(4));
    let r = report(out.path(), "sal_nonintegrable");
    assert_eq!(r["status"], "hypothesis-failure");
    assert_eq!(r["result"]["hypothesisDiagnostics"]["fp"]["model"], "divergent");
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverges"));
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bad_json.json", "{ not json"),
        ("bad_kind.json", r#"{"kind": "fourier", "payload": {}}"#),
        ("bad_field.json", r#"{"kind": "reginteg", "payload": {"function": {"expr": "x", "colour": 1}}}"#),
        ("bad_expr.json", r#"{"kind": "reginteg", "payload": {"function": {"expr": "x +* 1"}}}"#),
        ("bad_grid.json", r#"{"kind": "substitution", "payload": {"function": {"expr": "exp(-x)"}}, "output": {"grid": "0:1:3:geometric"}}"#),
    ];
    for (name, text) in cases {
        let p = write_spec(dir.path(), name, text);
        let o = run_spec(&p, dir.path(), &[]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = run_spec(&dir.path().join("missing.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_spec(
        dir.path(),
        "undeclared.json",
        r#"{"kind": "reginteg", "payload": {"function": {"expr": "1/x^2", "infinity": {"order": 20}}}}"#,
    );
    let o = run_spec(&p, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(dir.path(), "undeclared")["status"], "numerical-failure");
}

#[test]
fn flags_override_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_spec(
        &specs_dir().join("pushforward_u0.json"),
        dir.path(),
        &["--grid", "0.01:0.1:4:linear", "--truncate", "1", "--json-only"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("pushforward_u0.csv").exists());
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    let samples = printed["result"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 4);
    assert_eq!(printed["result"]["prediction"]["remainderOrder"], 2.0);
    let o = run_spec(&specs_dir().join("pushforward_u0.json"), dir.path(), &["--grid", "1:2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_sample_spec_succeeds_except_the_divergent_one() {
    let out = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(specs_dir()).unwrap() {
        let p = entry.unwrap().path();
        let o = run_spec(&p, out.path(), &[]);
        let expect = if p.ends_with("sal_nonintegrable.json") { 4 } else { 0 };
        assert_eq!(o.status.code(), Some(expect), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn blowup_spec_reports_agreeing_verdicts() {
    let out = tempfile::tempdir().unwrap();
    run_spec(&specs_dir().join("blowup_linear.json"), out.path(), &[]);
    let r = report(out.path(), "blowup_linear");
    let b = &r["result"]["blowup"];
    assert_eq!(b["conditionC"]["agree"], true);
    assert_eq!(b["conditionC"]["bounded"], true);
    for c in b["dtOverT"].as_array().unwrap() {
        assert!((c["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn selftest_filter_runs_a_subset() {
    let o = bin().args(["selftest", "--filter", "reginteg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.contains("[PASS]"));
}

#[test]
fn selftest_with_a_corrupted_spec_dir_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    write_spec(dir.path(), "broken.json", "{\"kind\": ");
    let o = bin().args(["selftest", "--filter", "indexset", "--specs"]).arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin().args(["selftest", "--filter", "indexset", "--specs"]).arg(dir.path().join("nowhere")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
