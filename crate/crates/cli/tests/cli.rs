//! End-to-end tests of the `covconv` binary: exit codes, JSON output
//! shapes, and CSV artifacts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn covconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

#[test]
fn decompose_matches_closed_form() {
    let out = covconv(&["decompose", "--n", "2"]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    assert_eq!(json["n"], 2);
    assert_eq!(json["multiplicities"]["0"], 1);
    assert_eq!(json["multiplicities"]["1"], 1);
    assert_eq!(json["multiplicities"]["2"], 1);
}

#[test]
fn geodesic_equator_quarter_turn() {
    let out = covconv(&[
        "geodesic",
        "--manifold",
        "sphere",
        "--x",
        "1.5707963,0",
        "--v",
        "0,1.5707963",
        "--steps",
        "200",
    ]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    let end = json["end"].as_array().unwrap();
    // The flag value 1.5707963 truncates pi/2; tolerance absorbs that.
    assert!((end[0].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert!((end[1].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn shipped_flat_reduction_config_passes() {
    let cfg = config_path("flat_reduction.json");
    let out = covconv(&["check", "flat-reduction", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["status"], "pass");
    assert_eq!(json["check"], "flat-reduction");
    assert!(json["max_abs_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn check_name_defaults_to_config_key() {
    let cfg = config_path("holonomy_rectangle.json");
    let out = covconv(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["check"], "holonomy");
}

#[test]
fn failing_check_exits_one_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.json");
    std::fs::write(
        &cfg,
        r#"{
            "check": "weight-sharing",
            "manifold": { "name": "sphere" },
            "kernel": { "family": "linear-vector" },
            "quadrature": { "radius": 0.3, "n_r": 2, "n_ang": 4 },
            "integrator": { "steps_per_unit": 60 },
            "path": [[1.3, 0.2], [1.6, 0.9]],
            "tolerance": 1e-300
        }"#,
    )
    .unwrap();
    let out = covconv(&["check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["status"], "fail");
}

#[test]
fn unknown_preset_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{ "manifold": { "name": "moebius" } }"#).unwrap();
    let out = covconv(&["check", "flat-reduction", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_check_name_exits_two() {
    let cfg = config_path("flat_reduction.json");
    let out = covconv(&["check", "nonsense", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_two() {
    let out = covconv(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = covconv(&["check", "flat-reduction", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transport_polar_quarter_circle() {
    let out = covconv(&[
        "transport",
        "--manifold",
        "flat2d-polar",
        "--path",
        "1,0;1,1.5707963267948966",
        "--components",
        "1,0",
        "--steps",
        "400",
    ]);
    assert!(out.status.success());
    let json = stdout_json(&out);
    let v = json["output"].as_array().unwrap();
    // Chart components of a Euclidean-constant vector after a quarter turn.
    assert!(v[0].as_f64().unwrap().abs() < 1e-8);
    assert!((v[1].as_f64().unwrap() + 1.0).abs() < 1e-8);
}

#[test]
fn convolve_writes_labeled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("conv.json");
    std::fs::write(
        &cfg,
        r#"{
            "manifold": { "name": "flat2d-cartesian" },
            "field": { "name": "bump-scalar", "params": [0.0, 0.0, 0.5, 1.0] },
            "kernel": { "family": "linear-vector" },
            "quadrature": { "radius": 0.3, "n_r": 2, "n_ang": 4 },
            "integrator": { "steps_per_unit": 50 },
            "ref_point": [0.0, 0.0],
            "output_points": [[0.0, 0.0], [0.5, 0.25]]
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("out/outputs.csv");
    let out = covconv(&[
        "convolve",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(&csv).unwrap();
    let mut lines = written.lines();
    assert_eq!(lines.next().unwrap(), "coord1,coord2,out_0,out_1");
    assert_eq!(lines.count(), 2);
    let json = stdout_json(&out);
    assert_eq!(json["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(json["rank"][0], 1);
}

#[test]
fn geodesic_csv_has_param_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("geo.csv");
    let out = covconv(&[
        "geodesic",
        "--manifold",
        "flat2d-cartesian",
        "--x",
        "0,0",
        "--v",
        "1,2",
        "--steps",
        "10",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&csv).unwrap();
    let mut lines = written.lines();
    assert_eq!(lines.next().unwrap(), "param,coord1,coord2");
    assert_eq!(lines.count(), 11);
}
