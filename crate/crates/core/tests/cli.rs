//! End-to-end runs of the `polyq` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn polyq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_then_verify_parity() {
    let dir = TempDir::new().unwrap();
    let circuit = dir.path().join("circuit.json");
    let out = polyq(&[
        "compile",
        "--poly",
        path(&data("parity2.json")),
        "--function",
        path(&data("parity2.fn.json")),
        "--out",
        path(&circuit),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["pass"], Value::Bool(true));
    assert_eq!(report["query_count"], 1);

    let out = polyq(&[
        "verify",
        "--circuit",
        path(&circuit),
        "--function",
        path(&data("parity2.fn.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let max = v["max_error"].as_f64().unwrap();
    assert!((max - 1.0 / 3.0).abs() < 1e-9, "max error {max}");
}

#[test]
fn compile_from_block_form_and_function_alone() {
    let block = data("parity2.block.json");
    let function = data("parity2.fn.json");
    let with_block = ["compile", "--block", path(&block), "--function", path(&function)];
    let alone = ["compile", "--function", path(&function)];
    for args in [&with_block[..], &alone[..]] {
        let out = polyq(args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn simulate_reports_matching_probabilities() {
    let dir = TempDir::new().unwrap();
    let circuit = dir.path().join("circuit.json");
    let out = polyq(&[
        "compile",
        "--function",
        path(&data("parity2.fn.json")),
        "--out",
        path(&circuit),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = polyq(&["simulate", "--circuit", path(&circuit), "--input", "+-", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let r = v["report"]["r"].as_f64().unwrap();
    let sv = v["statevector_r"].as_f64().unwrap();
    assert!((r - sv).abs() < 1e-10);
    assert_eq!(v["report"]["decision"], 1);
    assert!(v["report"]["sampled"].is_u64());

    let out = polyq(&["simulate", "--circuit", path(&circuit), "--input", "++"]);
    assert_eq!(stdout_json(&out)["report"]["decision"], 0);
}

#[test]
fn norms_and_split_on_chsh() {
    let out = polyq(&["norms", "--matrix", path(&data("chsh.matrix.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = polyq(&["split", "--matrix", path(&data("chsh.matrix.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert!(v["ratio"].as_f64().unwrap() <= v["target"].as_f64().unwrap() + 1e-12);
}

#[test]
fn decouple_reports_bound() {
    let out = polyq(&["decouple", "--poly", path(&data("parity2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["bound_b"], 3.0);
}

#[test]
fn cubic_polynomial_is_rejected() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "p.json", r#"{"n": 3, "terms": [{"vars": [1, 2, 3], "coef": 0.5}]}"#);
    let f = write(&dir, "f.json", r#"{"n": 3, "points": [{"x": [1, 1, 1], "f": 1}]}"#);
    let out = polyq(&["compile", "--poly", &poly, "--function", &f]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn poor_approximation_fails() {
    let dir = TempDir::new().unwrap();
    let poly = write(&dir, "p.json", r#"{"n": 2, "terms": [{"vars": [], "coef": 0.5}]}"#);
    let out = polyq(&["compile", "--poly", &poly, "--function", path(&data("parity2.fn.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"n\": 2, \"terms\": [");
    let out = polyq(&["compile", "--poly", &bad, "--function", path(&data("parity2.fn.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let unknown = write(&dir, "unknown.json", r#"{"rows": 1, "cols": 1, "data": [[1.0]], "extra": 0}"#);
    assert_eq!(polyq(&["norms", "--matrix", &unknown]).status.code(), Some(2));
    assert_eq!(polyq(&["norms", "--matrix", "/nonexistent/matrix.json"]).status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(polyq(&["compile", "--bogus"]).status.code(), Some(2));
    assert_eq!(polyq(&[]).status.code(), Some(2));
}

#[test]
fn tiny_budget_is_a_capacity_error() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.json", r#"{"rows": 2, "cols": 2, "data": [[3.0, 0.1], [0.1, 0.01]]}"#);
    let out = polyq(&["split", "--matrix", &m, "--budget", "4", "--delta", "0.0001"]);
    assert!(matches!(out.status.code(), Some(1) | Some(3)), "{:?}", out.status);
}
