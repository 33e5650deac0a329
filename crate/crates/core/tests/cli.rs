use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn logsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logsp")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

const BISTABLE: &[&str] = &["--gamma", "1", "--a", "1", "--p", "6", "--c", "0.5"];

#[test]
fn classify_reports_tag_and_certificate() {
    let out = logsp(&["classify", "--gamma", "-1", "--a", "0.1", "--p", "3", "--c", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["tag"], "LambdaEmpty");
    assert!(v["certificate"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["--out", d, "--grid-n", "128", "--grid-L", "32", "--trace", "solve", "--gamma", "1", "--a", "0", "--p", "3", "--c", "1"];
    let out = logsp(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["converged"], true);
    for f in ["solution.lpf", "report.json", "trace.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "converged");
    let energy = csv_column(&dir.path().join("trace.csv"), "F");
    assert!(energy.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn exit_codes_distinguish_failures() {
    let refusal = logsp(&["solve", "--gamma", "-1", "--a", "0.1", "--p", "3", "--c", "1"]);
    assert_eq!(code(&refusal), 4);
    assert!(!refusal.stderr.is_empty());

    assert_eq!(code(&logsp(&["classify", "--p", "2"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"params\": {\"gamma\": 1.0, \"bogus\": 2}}").unwrap();
    assert_eq!(code(&logsp(&["--config", cfg.to_str().unwrap(), "classify"])), 2);
}

#[test]
fn fiber_changes_sign_at_each_critical_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["--out", dir.path().to_str().unwrap(), "--grid-n", "64", "--grid-L", "16", "fiber"];
    args.extend_from_slice(BISTABLE);
    let out = logsp(&args);
    assert_eq!(code(&out), 0);
    let points = json(&out)["points"].as_array().unwrap().len();
    assert_eq!(points, 2);
    let phi = csv_column(&dir.path().join("fiber.csv"), "phi");
    let changes = phi.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert_eq!(changes, points);
}

#[test]
fn fiber_range_override() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["--out", dir.path().to_str().unwrap(), "--grid-n", "64", "--grid-L", "16", "fiber"];
    args.extend_from_slice(&["--t-min", "0.5", "--t-max", "2", "--samples", "7"]);
    args.extend_from_slice(BISTABLE);
    assert_eq!(code(&logsp(&args)), 0);
    let t = csv_column(&dir.path().join("fiber.csv"), "t");
    assert_eq!(t.len(), 7);
    assert!((t[0] - 0.5).abs() < 1e-12 && (t[6] - 2.0).abs() < 1e-12);
}

#[test]
fn constants_lists_thresholds() {
    let out = logsp(&["constants", "--gamma", "-1", "--a", "1", "--p", "3", "--c", "1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for key in ["kgn", "K1", "K2", "kv2", "method", "tolerances", "rayleigh_quotient"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_passes_and_detects_injected_origin_error() {
    assert_eq!(code(&logsp(&["verify"])), 0);
    let out = logsp(&["verify", "--inject-origin", "1e-3"]);
    assert_eq!(code(&out), 1);
    let failed: Vec<_> = json(&out)["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).map(|c| c["name"].clone()).collect();
    assert_eq!(failed, vec![Value::from("v_splitting")]);
}
