//! End-to-end checks of the binary: schemas, exit codes, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jamesgeo"))
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn norm_subcommand_matches_pinned_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "e3.json", r#"{"entries": [[3, 1.0]]}"#);
    let out = bin()
        .args(["norm", "--p", "2", "--input", &input, "--oracle"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0_f64.sqrt()).abs() < 1e-12);
    assert_eq!(v["witness"], serde_json::json!([2, 3, 4]));
    assert!(v["discrepancy"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn bad_exponent_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.json", r#"{"entries": [[0, 1.0]]}"#);
    let out = bin()
        .args(["norm", "--p", "0.5", "--input", &input])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("p > 1"), "{}", stderr(&out));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.json", r#"{"entries": [[0, 1.0], [0, 2.0]]}"#);
    let out = bin()
        .args(["norm", "--p", "2", "--input", &input])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("entries[1]") && err.contains("duplicate"), "{err}");
}

#[test]
fn dualnorm_demands_the_dual_kind() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "v.json", r#"{"entries": [[0, 1.0]]}"#);
    let out = bin()
        .args(["dualnorm", "--p", "2", "--input", &input])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kind"), "{}", stderr(&out));
}

#[test]
fn impossible_tolerance_signals_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "f.json",
        r#"{"kind": "dual", "entries": [[0, 1.0], [1, -0.7], [2, 0.3]]}"#,
    );
    let out = bin()
        .args(["dualnorm", "--p", "2", "--input", &input, "--tol", "1e-15"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"), "{}", stderr(&out));
}

#[test]
fn eqnorm_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.json",
        r#"{"kind": "dual", "entries": [[0, 1.0], [2, -1.0]]}"#,
    );
    let out = bin()
        .args(["eqnorm", "--p", "2", "--side", "dual", "--input", &f, "--tol", "1e9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 2.0_f64.sqrt()).abs() < 1e-6);
    assert_eq!(v["cuts"], serde_json::json!([2]));

    let x = write(dir.path(), "x.json", r#"{"entries": [[2, 1.0], [3, 1.0]]}"#);
    let out = bin()
        .args(["eqnorm", "--p", "2", "--side", "primal", "--input", &x, "--tol", "1e9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(v["lower"].as_f64().unwrap() <= v["upper"].as_f64().unwrap());
    assert!((v["upper"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn midpoint_check_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(
        dir.path(),
        "pair.json",
        r#"{"x": {"entries": [[2, 1.0]]}, "y": {"entries": [[2, -1.0]]}}"#,
    );
    let center = write(dir.path(), "z.json", r#"{"entries": []}"#);
    let out = bin()
        .args([
            "midpoint", "check", "--p", "2", "--delta", "0.5", "--input", &pair, "--z", &center,
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"member\":true"));

    let out = bin()
        .args([
            "midpoint", "inner", "--p", "2", "--delta", "0.5", "--input", &pair, "--samples",
            "50", "--seed", "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"passed\":true"));

    let out = bin()
        .args([
            "midpoint", "outer", "--p", "2", "--delta", "0.5", "--input", &pair, "--samples",
            "50", "--seed", "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"passed\":true"));
}

#[test]
fn graph_growth_csv_has_slope_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("growth.csv");
    let out = bin()
        .args([
            "graph",
            "growth",
            "--p",
            "2",
            "--q",
            "4",
            "--k",
            "2..8",
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("# slope = 0.252"), "{csv}");
    assert_eq!(csv.lines().count(), 2 + 7, "{csv}");
}

#[test]
fn graph_pair_guard_respects_override() {
    let args = [
        "graph", "lip", "--k", "2", "--ground-set", "1..8", "--p", "2", "--max-pairs", "10",
    ];
    let out = bin().args(args).env_remove("JAMESGEO_GUARD_OVERRIDE").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("guard"), "{}", stderr(&out));

    let out = bin().args(args).env("JAMESGEO_GUARD_OVERRIDE", "1").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["value"].as_f64().unwrap() - 6.0_f64.sqrt()).abs() < 1e-12);
}

#[test]
fn graph_map_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(
        dir.path(),
        "map.json",
        r#"{
            "k": 2,
            "p": 2.0,
            "table": [
                {"vertex": [1, 2], "image": {"entries": [[1, 1.0]]}},
                {"vertex": [1, 3], "image": {"entries": [[1, 1.0]]}},
                {"vertex": [2, 3], "image": {"entries": [[5, 1.0]]}}
            ]
        }"#,
    );
    let out = bin()
        .args([
            "graph", "ramsey", "--k", "2", "--p", "2", "--map", &map, "--target-size", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["diameter"].as_f64().unwrap(), 0.0);
    assert_eq!(v["exact"], serde_json::json!(true));
}

#[test]
fn mindisp_reports_the_bound_side() {
    let out = bin()
        .args(["graph", "mindisp", "--k", "2", "--ground-set", "1..8", "--p", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(v["min"].as_f64().unwrap() > 0.0);
    assert!(v["bound"].as_f64().unwrap() > 0.0);
    assert!(v["observational"].as_str().unwrap().contains("finite"));
}

#[test]
fn reproduce_is_deterministic_and_green() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.txt");
    let out = bin()
        .args(["reproduce", "--seed", "0", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("criterion 12 determinism: PASS"), "{text}");
    assert!(text.contains("criteria passed: 12/12"), "{text}");
    assert_eq!(text, stdout(&out));
}
