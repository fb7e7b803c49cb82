//! End-to-end runs of the command-line binary: artifact formats, round
//! trips, error reporting, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_moment-kernel")
}

fn work_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mk_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("spawn")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command failed: {:?}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn eigenseq_gaussian_matches_examples() {
    let dir = work_dir("eigenseq");
    let out = dir.join("eigenseq.csv");
    run_ok(&[
        "eigenseq",
        "--source",
        "gaussian",
        "--radius",
        "1",
        "--max-degree",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "N,matrix_size,lambda_min,residual_bound,precision_bits_used"
    );
    assert_eq!(lines.len(), 4);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[1], "1");
    assert!(row[2].starts_with("1."), "lambda at N=0: {}", row[2]);
    let row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(row[1], "2");
    assert!(row[2].starts_with("1."));
    let row: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row[1], "3");
    assert!(
        row[2].starts_with("5.857864376269049"),
        "lambda at N=2: {}",
        row[2]
    );
    assert!(row[2].contains("e-1"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn duality_json_product_near_one() {
    let dir = work_dir("duality");
    let out = dir.join("duality.json");
    run_ok(&[
        "duality",
        "--source",
        "gaussian",
        "--max-degree",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let payload: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    for key in [
        "lambda_min",
        "lambda_max_K",
        "product",
        "residual_bound",
        "trace_K",
    ] {
        assert!(payload.get(key).is_some(), "missing key {key}");
    }
    let product: f64 = payload["product"].as_str().unwrap().parse().unwrap();
    let bound: f64 = payload["residual_bound"].as_str().unwrap().parse().unwrap();
    assert!((product - 1.0).abs() <= 10.0 * bound);
    let trace: f64 = payload["trace_K"].as_str().unwrap().parse().unwrap();
    assert!((trace - 3.0).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn kernelsum_gaussian_at_i() {
    let dir = work_dir("kernelsum");
    let out = dir.join("ks.csv");
    run_ok(&[
        "kernelsum",
        "--source",
        "gaussian",
        "--max-degree",
        "2",
        "--point",
        "0,1",
        "--shape",
        "total",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,partial_sum");
    let vals: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 3);
    assert!((vals[0] - 1.0).abs() < 1e-12);
    assert!((vals[1] - 2.0).abs() < 1e-12);
    assert!((vals[2] - 4.0).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn diagnose_atomic_reports_exact_zero() {
    let dir = work_dir("diag_atomic");
    let out = dir.join("report.json");
    run_ok(&[
        "diagnose",
        "--source",
        "atomic:1@1",
        "--max-degree",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    let payload: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(payload["finite_n_only"], serde_json::Value::Bool(true));
    let verdict = payload["verdict"].as_str().unwrap();
    assert!(verdict.contains("finite rank"), "verdict: {verdict}");
    let cells = payload["cells"].as_array().unwrap();
    assert_eq!(cells[1]["exact_zero"], serde_json::Value::Bool(true));
    assert_eq!(cells[1]["lambda_min"].as_str().unwrap(), "0");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn diagnose_product_emits_verdict_payload() {
    let dir = work_dir("diag_prod");
    let out = dir.join("report.json");
    let stdout = run_ok(&[
        "diagnose",
        "--source",
        "product:gaussian|lognormal:1",
        "--radii",
        "0.5,1,2",
        "--max-degree",
        "4",
        "--points",
        "i,i",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("verdict"));
    let payload: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(
        payload["verdict"].as_str().unwrap(),
        "indeterminate-like (by Petersen (b))"
    );
    assert_eq!(payload["finite_n_only"], serde_json::Value::Bool(true));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn moments_table_round_trips_through_eigenseq() {
    let dir = work_dir("moments");
    let table = dir.join("gaussian.json");
    run_ok(&[
        "moments",
        "--source",
        "gaussian",
        "--max-degree",
        "8",
        "--out",
        table.to_str().unwrap(),
    ]);
    let direct = dir.join("direct.csv");
    run_ok(&[
        "eigenseq",
        "--source",
        "gaussian",
        "--max-degree",
        "4",
        "--out",
        direct.to_str().unwrap(),
    ]);
    let via_table = dir.join("table.csv");
    let table_spec = format!("table:{}", table.display());
    run_ok(&[
        "eigenseq",
        "--source",
        &table_spec,
        "--max-degree",
        "4",
        "--out",
        via_table.to_str().unwrap(),
    ]);
    assert_eq!(read(&direct), read(&via_table));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_specs_fail_with_collected_violations() {
    let out = run(&[
        "eigenseq",
        "--source",
        r#"{"kind":"product","factors":[]}"#,
        "--max-degree",
        "2",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty product"), "stderr: {err}");

    let out = run(&[
        "eigenseq",
        "--source",
        "fourier",
        "--max-degree",
        "2",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert!(!out.status.success());

    // degenerate source: duality must fail before the check, not fake it
    let out = run(&[
        "duality",
        "--source",
        "atomic:1@1",
        "--max-degree",
        "2",
        "--out",
        "/tmp/unused.json",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degenerate"), "stderr: {err}");
}

#[test]
fn precision_env_var_is_honored() {
    let dir = work_dir("envvar");
    let out = dir.join("eigenseq.csv");
    let output = Command::new(exe())
        .env("MOMENT_KERNEL_PRECISION", "128")
        .args([
            "eigenseq",
            "--source",
            "gaussian",
            "--max-degree",
            "1",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = read(&out);
    let last = text.lines().last().unwrap();
    assert!(last.ends_with(",128"), "row: {last}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn scaled_shorthand_reaches_closed_form() {
    // scale(δ_2, R=2) behaves as δ_1: exact zero from N = 1 on
    let dir = work_dir("scaled");
    let out = dir.join("seq.csv");
    run_ok(&[
        "eigenseq",
        "--source",
        "scaled:2:atomic:2@1",
        "--max-degree",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[2].split(',').nth(2).unwrap() == "0");
    assert!(lines[3].split(',').nth(2).unwrap() == "0");
    std::fs::remove_dir_all(&dir).ok();
}
