//! Exit-code contract and input handling of the command-line interface.

use std::fs;
use std::process::{Command, Output};

fn glnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glnorm"))
        .args(args)
        .env("GL_THREADS", "2")
        .output()
        .expect("run glnorm")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn norm_constant_lorentz_closed_form() {
    let out = glnorm(&[
        "norm",
        "--analytic",
        "constant=1",
        "--space",
        "lorentz",
        "--p",
        "2,2",
        "--q",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 1e-6);
    assert_eq!(v["result"]["converged"], serde_json::Value::Bool(true));
}

#[test]
fn norm_indicator_lorentz_closed_form() {
    let out = glnorm(&[
        "norm",
        "--analytic",
        "indicator=0.25,0.25",
        "--space",
        "lorentz",
        "--p",
        "2,2",
        "--q",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value = stdout_json(&out)["result"]["value"].as_f64().unwrap();
    assert!((value - 0.25).abs() < 1e-6);
}

#[test]
fn missing_csv_path_is_an_input_error_naming_the_path() {
    let out = glnorm(&[
        "norm",
        "--csv",
        "/nonexistent/grid.csv",
        "--space",
        "lorentz",
        "--p",
        "2,2",
        "--q",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/grid.csv"), "stderr: {err}");
}

#[test]
fn csv_grid_round_trip() {
    let dir = std::env::temp_dir().join("glnorm-cli-test");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("grid.csv");
    fs::write(&path, "2,2\n3,1\n0,2\n").unwrap();
    let out = glnorm(&[
        "norm",
        "--csv",
        path.to_str().unwrap(),
        "--space",
        "weak-lorentz",
        "--p",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let value = stdout_json(&out)["result"]["value"].as_f64().unwrap();
    // rearranged top-left cell is 3 at t = (1/2, 1/2): 3 * 0.5 = 1.5
    assert!((value - 1.5).abs() < 1e-9, "value {value}");
}

#[test]
fn malformed_analytic_spec_is_an_input_error() {
    let out = glnorm(&[
        "norm",
        "--analytic",
        "mystery=1",
        "--space",
        "lorentz",
        "--p",
        "2,2",
        "--q",
        "2,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mixed_theta_signs_are_an_input_error() {
    let out = glnorm(&[
        "norm",
        "--analytic",
        "constant=1",
        "--space",
        "grand",
        "--p",
        "2,2",
        "--q",
        "1,1",
        "--theta",
        "1,-1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mixed signs"), "stderr: {err}");
}

#[test]
fn sweep_theta_is_non_increasing() {
    let out = glnorm(&[
        "sweep",
        "--analytic",
        "constant=1",
        "--axis",
        "theta1",
        "--from",
        "0.0",
        "--to",
        "2.0",
        "--steps",
        "9",
        "--p",
        "1,1",
        "--q",
        "1,1",
        "--theta",
        "0,1",
        "--nodes",
        "256",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["monotone"], "non-increasing");
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);
}

#[test]
fn sweep_rejects_bad_axis_and_empty_range() {
    let out = glnorm(&[
        "sweep", "--analytic", "constant=1", "--axis", "sideways", "--from", "0", "--to", "1",
        "--steps", "4", "--p", "1,1", "--q", "1,1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = glnorm(&[
        "sweep", "--analytic", "constant=1", "--axis", "theta1", "--from", "1", "--to", "1",
        "--steps", "4", "--p", "1,1", "--q", "1,1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_csv_format() {
    let out = glnorm(&[
        "sweep", "--analytic", "indicator=0.25,0.25", "--axis", "q1", "--from", "1", "--to", "3",
        "--steps", "5", "--p", "2,2", "--q", "1,1", "--theta", "1,1", "--nodes", "256",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("value,norm,eps1,eps2,converged\n"), "{text}");
    assert!(text.lines().count() >= 6);
}

#[test]
fn verify_t6_gate_violation_is_an_input_error() {
    let out = glnorm(&[
        "verify", "t6", "--p", "2,2", "--q", "1,1", "--tau", "2,2", "--theta", "1,1",
        "--lambda", "1.2,1.2", "--family", "constants", "--nodes", "128",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("relation"), "stderr: {err}");
}

#[test]
fn verify_t1_small_run_passes() {
    let out = glnorm(&[
        "verify", "t1", "--p", "2,2", "--q", "2,2", "--theta", "1,1", "--family", "constants",
        "--nodes", "128",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
}

#[test]
fn verify_writes_report_file() {
    let dir = std::env::temp_dir().join("glnorm-cli-test");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t7.json");
    let out = glnorm(&[
        "verify", "t7", "--p", "1,1", "--tau", "1,1", "--theta", "1,1", "--family", "constants",
        "--nodes", "128", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["reports"][0]["all_within"], serde_json::Value::Bool(true));
}

#[test]
fn divergent_norm_exits_with_code_two() {
    // weak grand norm of a profile outside the space: grows under
    // refinement, reported non-converged
    let out = glnorm(&[
        "norm",
        "--analytic",
        "powerlog=1,1,-0.5,-0.5",
        "--space",
        "grand-weak",
        "--p",
        "1,1",
        "--theta=-0.5,-0.5",
        "--nodes",
        "512",
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["result"]["converged"], serde_json::Value::Bool(false));
}
