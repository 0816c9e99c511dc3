use std::path::Path;
use std::process::{Command, Output};

fn fracmg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracmg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn reference(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn csv_header_and_rows() {
    let out = fracmg(&["--s", "0.5", "--n", "32,64", "--no-timing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "s,N,J,iterations,condition_estimate,exact_condition,wall_time,seed");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.5,32,5,"));
}

#[test]
fn output_is_byte_stable() {
    let args = ["--mode", "negative", "--s", "-1,-0.5", "--n", "32,64", "--no-timing", "--seed", "3"];
    let a = fracmg(&args);
    let b = fracmg(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = fracmg(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn json_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.json");
    let out = fracmg(&["--s", "1", "--n", "64", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(rows[0]["N"], 64);
    let iterations = rows[0]["iterations"].as_u64().unwrap();
    assert!((13..=19).contains(&iterations), "{iterations}");
    assert!(rows[0]["converged"].as_bool().unwrap());
}

#[test]
fn compare_passes_against_bundled_table() {
    let out = fracmg(&["--s", "0,1", "--compare", &reference("positive.csv")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0 flagged"));
}

#[test]
fn compare_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.csv");
    std::fs::write(&path, "s,N,iterations,condition\n0.5,64,12,4.5\n").unwrap();
    let out = fracmg(&["--s", "0.5", "--n", "64", "--compare", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flagged s=0.5 N=64"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(fracmg(&["--mode", "positive", "--s", "-0.5"]).status.code(), Some(2));
    assert_eq!(fracmg(&["--n", "40"]).status.code(), Some(2));
    assert_eq!(fracmg(&["--tol", "0"]).status.code(), Some(2));
    assert_eq!(fracmg(&["--compare", "/nonexistent/ref.csv"]).status.code(), Some(2));
    assert_eq!(fracmg(&["--mode", "sideways"]).status.code(), Some(2));
}

#[test]
fn spectral_preconditioner_is_exact() {
    let out = fracmg(&["--mode", "negative", "--s", "-0.5", "--n", "128", "--preconditioner", "spectral"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(3), Some("1"));
}

#[test]
fn theory_mode_emits_json() {
    let out = fracmg(&["--mode", "theory", "--seed", "5"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["loewner_heinz"].as_array().unwrap().len(), 3);
    assert!(report["group_property"][0]["defect"].as_f64().unwrap() <= 1e-10);
}
