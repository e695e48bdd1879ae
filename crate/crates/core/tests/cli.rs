//! End-to-end runs of the `qlmass` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn qlmass(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlmass"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn lemma6_check_passes_and_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = qlmass(dir.path(), &["check", "lemma6", "--samples", "5000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed = 7"));
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["detail"]["samples"], 5000);
}

#[test]
fn geometry_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["gaussbonnet", "minkowski"] {
        let o = qlmass(dir.path(), &["check", suite]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{suite}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(stdout_json(&o)["passed"], true);
    }
}

#[test]
fn embed_round_sphere_has_zero_margin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(
        dir.path(),
        "metric.json",
        &json!({"theta_n": 1024, "preset": {"name": "round", "radius": 3.0}}),
    );
    let o = qlmass(dir.path(), &["embed", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v["minkowski_margin"].as_f64().unwrap().abs() <= 1e-9, "{v}");
    assert!((v["area"].as_f64().unwrap() - 36.0 * std::f64::consts::PI).abs() < 1e-8);
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1026);
    assert!(dir.path().join("embedding.json").exists());
}

#[test]
fn embed_without_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qlmass(dir.path(), &["embed"]).status.code(), Some(2));
}

#[test]
fn flow_with_unit_lapse_has_zero_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = qlmass(dir.path(), &["flow", "--h0", "1", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["m_inf"].as_f64().unwrap().abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,m_r,h_min,h_max,rhs11,dmdr_fd"));
    for line in lines {
        let m: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(m.abs() < 1e-12, "{line}");
    }
}

#[test]
fn schwarzschild_table_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = qlmass(dir.path(), &["schwarzschild", "--radii", "2.5,10"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("schwarzschild.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[3] <= 1e-6, "{r:?}");
    }
    assert!((rows[0][2] - 2.5 * (1.0 - 0.2f64.sqrt())).abs() < 1e-11);
}

#[test]
fn pipeline_writes_report_and_flow() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = json!({
        "data": {"grid": {"s_min": 0.0, "s_max": 1.0, "n": 200}, "preset": {"name": "perturbed", "seed": 3, "amplitude": 0.1}},
        "mode": "general"
    });
    let cfg = write_json(dir.path(), "scenario.json", &scenario);
    let o = qlmass(dir.path(), &["pipeline", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["ok"], true);
    assert!(report["E"].as_f64().unwrap() > 0.0);
    assert_eq!(report["inputs_digest"].as_str().unwrap().len(), 64);
    assert!(std::fs::read_to_string(dir.path().join("flow.csv"))
        .unwrap()
        .starts_with("r,m_r"));

    let again = qlmass(dir.path(), &["pipeline", "--config", &cfg]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn pipeline_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qlmass(dir.path(), &["pipeline"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(
        qlmass(dir.path(), &["pipeline", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let horizon = json!({
        "data": {"grid": {"s_min": 0.1, "s_max": 2.0, "n": 200}, "preset": {"name": "isotropic_schwarzschild", "mass": 1.0}},
        "mode": "riemannian"
    });
    let cfg = write_json(dir.path(), "horizon.json", &horizon);
    let o = qlmass(dir.path(), &["pipeline", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["ok"], false);
}

#[test]
fn schwarzschild_inside_horizon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        qlmass(dir.path(), &["schwarzschild", "--radii", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn massless_schwarzschild_column_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = qlmass(dir.path(), &["schwarzschild", "--mass", "0", "--radii", "1,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("schwarzschild.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(cols[1].abs() < 1e-12 && cols[2] == 0.0, "{line}");
    }
}
