//! End-to-end runs of the meridian binary: exports, reports, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn meridian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meridian"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn generate_flat_csv() {
    let out = meridian(&[
        "generate",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--grid",
        "21",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,v,x1,x2,x3,x4,K,H2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 441);
    // K column vanishes for the flat family
    for row in rows {
        let k: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert!(k.abs() <= 1e-10, "K = {k}");
    }
}

#[test]
fn generate_obj_mesh_counts() {
    let out = meridian(&[
        "generate",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--grid",
        "21",
        "--format",
        "obj",
        "--project",
        "x1,x3,x4",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let vertices = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces = text.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(vertices, 441);
    assert_eq!(faces, 800); // 2 (n-1)^2 triangles
}

#[test]
fn resolution_below_three_is_rejected() {
    let out = meridian(&["generate", "--family", "flat", "--params", "a=1,b=1", "--grid", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_parallel_h_spec_file() {
    let dir = std::env::temp_dir().join("meridian-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let spec_path = dir.join("parallel_h.json");
    std::fs::write(
        &spec_path,
        r#"{
            "family": "parallel_h",
            "epsilon": -1,
            "params": {"a": 1.0, "b": 1.0, "f0": 1.0},
            "u_domain": [0.0, 1.0],
            "curve": {"family": "kappa_zero", "params": {"a": 1.0, "b": 1.0}, "v_domain": [-0.7, 0.7]}
        }"#,
    )
    .unwrap();
    let out = meridian(&["verify", "--spec", spec_path.to_str().unwrap(), "--expect", "parallel_h"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["classification"]["is_parallel_h"], true);
    // report echo reruns to the same residuals (bit for bit)
    let echo = report["spec"].to_string();
    let echo_path = dir.join("echo.json");
    std::fs::write(&echo_path, echo).unwrap();
    let again = meridian(&["verify", "--spec", echo_path.to_str().unwrap()]);
    assert_eq!(code(&again), 0);
    let report2: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    // identical residuals, modulo the expect_* record only the first run has
    let without_expect: Vec<&serde_json::Value> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["name"].as_str().unwrap().starts_with("expect_"))
        .collect();
    let rerun: Vec<&serde_json::Value> = report2["checks"].as_array().unwrap().iter().collect();
    assert_eq!(without_expect, rerun);
}

#[test]
fn verify_flat_expecting_constant_k_fails_with_exit_one() {
    let out = meridian(&[
        "verify",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--expect",
        "constant_k",
    ]);
    assert_eq!(code(&out), 1, "K = 0 must not certify as constant nonzero K");
}

#[test]
fn classify_exponential_profile_is_parallel_h() {
    // f = f0 e^{a u / 2} is the b = 0 closed form of the CMC family
    let out = meridian(&[
        "classify",
        "--family",
        "parallel_h",
        "--params",
        "a=1,b=0,f0=1",
        "--u-domain",
        "0,1",
    ]);
    assert_eq!(code(&out), 0);
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["is_parallel_h"], true);
}

#[test]
fn classify_cubic_is_unclassified() {
    let out = meridian(&[
        "classify",
        "--family",
        "poly",
        "--params",
        "c0=1,c1=0,c2=0,c3=1",
        "--u-domain",
        "0.5,1.5",
        "--curve",
        "constant_kappa",
        "--curve-params",
        "kappa0=1",
        "--v-domain",
        "-0.5,0.5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["decided"], "unclassified");
    assert!(result["residuals"].as_object().unwrap().len() > 3, "residual table expected");
}

#[test]
fn minimal_surface_detection() {
    // f f'' + f'^2 = 0 profile with kappa = 0 curve: H = 0
    let out = meridian(&[
        "classify",
        "--family",
        "pnmcv_i",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--curve",
        "kappa_zero",
        "--curve-params",
        "a=1,b=1",
        "--expect",
        "minimal",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn pnmcv_ii_lightlike_combination_is_input_error() {
    let out = meridian(&[
        "verify",
        "--family",
        "pnmcv_ii",
        "--params",
        "c=1,b=1,f0=1",
        "--curve",
        "constant_kappa",
        "--curve-params",
        "kappa0=1",
        "--v-domain",
        "-0.5,0.5",
    ]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("c^2 != kappa0^2"), "stderr: {err}");
}

#[test]
fn epsilon_mismatch_is_input_error() {
    let out = meridian(&[
        "generate",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--epsilon",
        "1",
        "--curve-params",
        "a=1,b=1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_floats_have_seventeen_significant_digits() {
    let out = meridian(&[
        "generate",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--grid",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    for cell in row.split(',') {
        // mantissa of d.16 scientific notation: 17 significant digits
        let mantissa = cell.split('e').next().unwrap();
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17, "cell {cell}");
    }
}

#[test]
fn generate_json_format() {
    let out = meridian(&[
        "generate",
        "--family",
        "parallel_h",
        "--params",
        "a=1,b=1,f0=1",
        "--u-domain",
        "0,1",
        "--grid",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 25);
    assert_eq!(v["spec"]["family"], "parallel_h");
    assert_eq!(v["degenerate_samples"], 0);
}

#[test]
fn tolerance_override_changes_verdict() {
    // an absurdly tight constancy tolerance makes the CMC check fail
    let base = [
        "verify",
        "--family",
        "parallel_h",
        "--params",
        "a=1,b=1,f0=1",
        "--u-domain",
        "0,1",
        "--expect",
        "cmc",
    ];
    let out = meridian(&base);
    assert_eq!(code(&out), 0);
    let mut strict = base.to_vec();
    strict.extend(["--tol", "constancy=1e-19"]);
    let out = meridian(&strict);
    assert_eq!(code(&out), 1);
    // unknown tolerance names are input errors
    let mut bogus = base.to_vec();
    bogus.extend(["--tol", "wibble=1"]);
    assert_eq!(code(&meridian(&bogus)), 2);
}

#[test]
fn out_file_is_written() {
    let dir = std::env::temp_dir().join("meridian-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("grid.csv");
    let _ = std::fs::remove_file(&path);
    let out = meridian(&[
        "generate",
        "--family",
        "flat",
        "--params",
        "a=1,b=1",
        "--u-domain",
        "0,1",
        "--grid",
        "5,7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert_eq!(text.lines().count(), 1 + 5 * 7);
}
