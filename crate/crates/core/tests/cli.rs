mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use evolflow::cli::run_with;
use evolflow::markov::RateMatrix;
use evolflow::{expm, Matrix};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    report: Value,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("evolflow").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    let stdout = String::from_utf8(out).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run { code, report, stdout, stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn write_matrix(dir: &TempDir, name: &str, m: &Matrix) -> PathBuf {
    write(dir, name, &serde_json::to_string(m).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn matrix_of(v: &Value) -> Matrix {
    serde_json::from_value(v.clone()).unwrap()
}

#[test]
fn flip_flop_semigroup_at_one() {
    let r = run(&["markov-semigroup", "--lambda", "1", "--t", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.report["status"], "pass");
    let a = matrix_of(&r.report["payload"]["samples"][0]["matrix"]);
    assert!(a.distance(&common::flip_flop_closed(1.0, 1.0)) <= 1e-12);
}

#[test]
fn sl_rejects_negative_determinant() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"n": 2, "real": [[1, 0], [0, -1]]}"#);
    let r = run(&["group-check", "--group", "sl", "--tol", "1e-9", s(&bad)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["status"], "fail");
    assert_eq!(r.report["residuals"]["membership"], 2.0);
}

#[test]
fn missing_file_is_an_io_error() {
    let r = run(&["expm", "/nonexistent/matrix.json"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["status"], "error");
    assert!(!r.stderr.is_empty());
}

#[test]
fn usage_errors_go_to_stderr() {
    let r = run(&[]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("Usage"));
    let r = run(&["group-check", "--bogus"]);
    assert_eq!(r.code, 2);
    let r = run(&["markov-semigroup", "--lambda", "1", "--t", "2:1:0.1"]);
    assert_eq!(r.code, 2);
    assert!(r.report["message"].as_str().unwrap().contains("grid"));
}

#[test]
fn help_exits_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("markov-semigroup"));
}

#[test]
fn expm_output_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let x = Matrix::from_real_rows(&[[0.3, -1.7, 0.1], [0.2, 0.0, 1.1], [-0.9, 0.4, 0.25]]).unwrap();
    let path = write_matrix(&dir, "x.json", &x);
    let r = run(&["expm", s(&path), "--t", "-0.7"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let got = matrix_of(&r.report["payload"]["matrix"]);
    assert_eq!(got, expm(&x.scale(-0.7)).unwrap());
}

#[test]
fn reports_are_deterministic() {
    let args = ["markov-semigroup", "--random", "4", "--seed", "11", "--t", "0:2:0.5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["markov-semigroup", "--random", "4", "--seed", "12", "--t", "0:2:0.5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn semigroup_csv_and_negative_times() {
    let dir = TempDir::new().unwrap();
    let grid = write(&dir, "grid.json", "[-1, 0, 0.5]");
    let out = dir.path().join("a.csv");
    let r = run(&["markov-semigroup", "--lambda", "1", "--t-grid", s(&grid), "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["payload"]["non_markov_range"], serde_json::json!([-1.0]));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,a_1_1,a_1_2,a_2_1,a_2_2,row_sum_defect,det,exp_trace");
    assert_eq!(lines.len(), 4);
    let fields: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], -1.0);
    assert!((fields[2] - (1.0 - std::f64::consts::E.powi(2)) / 2.0).abs() <= 1e-12);
}

#[test]
fn validate_and_balance() {
    let dir = TempDir::new().unwrap();
    let q = RateMatrix::birth_death(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
    let qp = write_matrix(&dir, "q.json", q.matrix());
    let r = run(&["markov-validate", "--rate", s(&qp)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    for key in ["chapman_kolmogorov", "kolmogorov_forward", "det_trace"] {
        assert!(r.report["residuals"][key].as_f64().unwrap() <= 1e-9, "{key}");
    }

    let bad = write(&dir, "bad.json", r#"{"n": 2, "real": [[1, -1], [0, 1]]}"#);
    let r = run(&["markov-validate", "--rate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert_eq!(r.report["payload"]["defects"].as_array().unwrap().len(), 2);

    // pi proportional to (1, 1/2, 1)
    let pi = write(&dir, "pi.json", "[0.4, 0.2, 0.4]");
    let r = run(&["markov-balance", "--rate", s(&qp), "--pi", s(&pi)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let r = run(&["markov-balance", "--rate", s(&qp), "--pi", s(&pi), "--truncate", "1,2"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let skewed = write(&dir, "pi2.json", "[0.5, 0.25, 0.25]");
    assert_eq!(run(&["markov-balance", "--rate", s(&qp), "--pi", s(&skewed)]).code, 1);
}

#[test]
fn flow_orbit_csv_is_sorted() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", r#"{"n": 2, "real": [[0, 1], [-1, 0]]}"#);
    let base = write(&dir, "a.json", r#"{"n": 2, "real": [[0, 1], [-1, 0]]}"#);
    let out = dir.path().join("orbit.csv");
    let r = run(&[
        "flow-orbit", "--generator", s(&x), "--base", s(&base), "--grid", "-2:2:0.1", "--group", "so", "--out", s(&out),
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,a_1_1,a_1_2,a_2_1,a_2_2,group_residual,det");
    assert_eq!(lines.len(), 42);
    let ts: Vec<f64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));

    let not_skew = write(&dir, "y.json", r#"{"n": 2, "real": [[1, 0], [0, 1]]}"#);
    let r = run(&["flow-orbit", "--generator", s(&not_skew), "--base", s(&base), "--group", "so"]);
    assert_eq!(r.code, 1);
}

#[test]
fn ode_solve_and_magnus() {
    let dir = TempDir::new().unwrap();
    let gen = write(&dir, "gen.json", r#"{"kind": "constant", "X": {"n": 2, "real": [[0, 1], [-1, 0]]}}"#);
    let a0 = write(&dir, "a0.json", r#"{"n": 2, "real": [[1, 0], [0, 1]]}"#);
    let r = run(&["ode-solve", "--gen-spec", s(&gen), "--a0", s(&a0), "--T", "1", "--h", "1e-3"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.report["residuals"]["oracle_error"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r.report["payload"]["steps"], 1000);

    let cos = write(
        &dir,
        "cos.json",
        r#"{"kind": "combination", "terms": [{"coef": {"kind": "cos"}, "matrix": {"n": 2, "real": [[-1, 1], [1, -1]]}}]}"#,
    );
    let r = run(&["magnus", "--gen-spec", s(&cos), "--t", "1.5707963267948966"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let q = Matrix::from_real_rows(&[[-1.0, 1.0], [1.0, -1.0]]).unwrap();
    assert!(matrix_of(&r.report["payload"]["matrix"]).distance(&expm(&q).unwrap()) <= 1e-8);

    let mixed = write(
        &dir,
        "mixed.json",
        r#"{"kind": "combination", "terms": [
            {"coef": {"kind": "poly", "coeffs": [1]}, "matrix": {"n": 2, "real": [[0, 1], [0, 0]]}},
            {"coef": {"kind": "poly", "coeffs": [0, 1]}, "matrix": {"n": 2, "real": [[0, 0], [1, 0]]}}]}"#,
    );
    let r = run(&["magnus", "--gen-spec", s(&mixed), "--t", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.report["residuals"]["commutator_defect"].as_f64().unwrap() > 0.0);
}

#[test]
fn curve_commands() {
    let dir = TempDir::new().unwrap();
    let ff = write(&dir, "ff.json", r#"{"variant": "closed_form", "name": "flip_flop", "lambda": 1}"#);
    let r = run(&["curve-check", s(&ff), "--check", "subgroup", "--grid", "-1:1:0.25"]);
    assert_eq!(r.code, 0, "{}", r.stdout);

    let line = write(
        &dir,
        "line.json",
        r#"{"variant": "exp_line", "A0": {"n": 2, "real": [[0, 1], [1, 0]]}, "X": {"n": 2, "real": [[0.3, 1], [-2, 0.1]]}}"#,
    );
    let r = run(&["curve-check", s(&line), "--check", "perfectness"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["payload"]["samples"].as_array().unwrap().len(), 41);

    let x = write(&dir, "x.json", r#"{"n": 2, "real": [[0.3, 1], [-2, 0.1]]}"#);
    let r = run(&["curve-check", s(&line), "--check", "ode", "--generator", s(&x)]);
    assert_eq!(r.code, 0, "{}", r.stdout);

    let out = dir.path().join("eval.csv");
    let r = run(&["curve-eval", s(&ff), "--t", "0:1:0.5", "--derivative", "--out", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let d0 = matrix_of(&r.report["payload"][0]["matrix"]);
    assert!(d0.distance(RateMatrix::flip_flop(1.0).unwrap().matrix()) <= 1e-12);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);
}

#[test]
fn algebra_check() {
    let dir = TempDir::new().unwrap();
    let x = write(&dir, "x.json", r#"{"n": 2, "real": [[0, 2], [-2, 0]]}"#);
    assert_eq!(run(&["algebra-check", "--algebra", "so", s(&x)]).code, 0);
    assert_eq!(run(&["algebra-check", "--algebra", "rate", s(&x)]).code, 1);
    assert_eq!(run(&["algebra-check", "--algebra", "nope", s(&x)]).code, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_evolflow");
    let ok = Command::new(bin).args(["markov-semigroup", "--lambda", "1", "--t", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["status"], "pass");
    let missing = Command::new(bin).args(["expm", "/nonexistent.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let bin = env!("CARGO_BIN_EXE_evolflow");
    let go = |seed: &str| {
        Command::new(bin)
            .args(["markov-semigroup", "--random", "3", "--t", "1"])
            .env("EVOLFLOW_SEED", seed)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(go("5"), go("5"));
    assert_ne!(go("5"), go("6"));
    let explicit = Command::new(bin)
        .args(["markov-semigroup", "--random", "3", "--t", "1", "--seed", "5"])
        .output()
        .unwrap()
        .stdout;
    assert_eq!(go("5"), explicit);
}
