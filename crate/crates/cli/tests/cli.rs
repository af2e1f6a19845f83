use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn gcs(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcs"))
        .args(args)
        .env("GCS_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let dir = dir.join("configs");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, body).unwrap();
    path
}

fn summary(out: &Path, stem: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{stem}.json"))).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn stationary_disc_orbit_keeps_its_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "rest",
        r#"{"group": "su11", "z0": [0.4, -0.2], "experiment": "classical",
            "track": {"kind": "su11", "h0": 1.0}, "horizon": 6.0, "samples": 60}"#,
    );
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rest.csv")).unwrap();
    let r = column(&csv, "abs_z");
    assert_eq!(r.len(), 61);
    let r0 = (0.4f64 * 0.4 + 0.2 * 0.2).sqrt();
    assert!(r.iter().all(|x| (x - r0).abs() < 1e-10));
}

#[test]
fn stability_summary_reports_high_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "osc",
        r#"{"group": "oscillator", "weights": [0.25, 0.75], "z0": [0.3, 0.0],
            "track": {"kind": "oscillator", "omega": {"sinusoid": {"offset": 1.0, "amplitude": 0.2, "frequency": 1.0}}},
            "horizon": 4.0, "samples": 40, "experiment": "stability",
            "truncation": {"dim": 256, "segments": 512}}"#,
    );
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "osc");
    assert!(s["min_fidelity"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert!(s["wronskian_drift"].as_f64().unwrap() < 1e-8);
    assert_eq!(s["weights"].as_array().unwrap().len(), 2);
    assert_eq!(s["config"]["group"], "oscillator");
    let csv = std::fs::read_to_string(dir.path().join("osc.csv")).unwrap();
    assert!(csv.starts_with("t,re_z,im_z,abs_z,fidelity_w1,fidelity_w2,fidelity\n"));
}

#[test]
fn complex_diagonal_coefficient_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "bad",
        r#"{"group": "su11", "z0": [0.1, 0.0], "experiment": "classical",
            "track": {"kind": "su11", "h0": [1.0, 0.5]}}"#,
    );
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("track.h0"));
    assert!(!dir.path().join("bad.csv").exists());
}

#[test]
fn point_outside_the_disc_names_z0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "far",
        r#"{"group": "su11", "z0": [1.2, 0.0], "experiment": "classical",
            "track": {"kind": "su11", "h0": 1.0}}"#,
    );
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("z0"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"group": "su2", "weights": [1.5], "z0": [0.5, 0.5], "experiment": "stability",
        "track": {"kind": "su2", "h0": {"piecewise": {"breaks": [1.5], "values": [1.0, -0.5]}}, "h": [0.3, 0.1]},
        "horizon": 3.0, "samples": 30, "truncation": {"segments": 256}}"#;
    let cfg = scenario(dir.path(), "spin", body);
    let a_dir = dir.path().join("a");
    let b_dir = dir.path().join("b");
    assert!(gcs(&["simulate", cfg.to_str().unwrap()], &a_dir).status.success());
    assert!(gcs(&["simulate", cfg.to_str().unwrap()], &b_dir).status.success());
    let a = std::fs::read(a_dir.join("spin.csv")).unwrap();
    let b = std::fs::read(b_dir.join("spin.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(summary(&a_dir, "spin")["trajectory_hash"], summary(&b_dir, "spin")["trajectory_hash"]);
}

#[test]
fn weight_sweep_shares_one_classical_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "ks",
        r#"{"group": "su11", "z0": [0.2, 0.1], "experiment": "stability",
            "track": {"kind": "su11", "h0": 1.0, "h": [0.2, 0.0]},
            "horizon": 2.0, "samples": 20, "truncation": {"dim": 96, "segments": 256},
            "sweep": {"weight": [0.5, 1.0, 2.0]}}"#,
    );
    let o = gcs(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = summary(dir.path(), "ks_sweep");
    let runs = report["scenarios"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let hashes: Vec<&Value> = runs.iter().map(|r| &r["summary"]["trajectory_hash"]).collect();
    assert!(hashes.iter().all(|h| *h == hashes[0] && h.is_string()));
    for (i, r) in runs.iter().enumerate() {
        assert_eq!(r["index"], i);
        assert!(r["summary"]["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-6);
        assert!(dir.path().join(format!("ks_{i:04}.csv")).exists());
    }
}

#[test]
fn thermal_sweep_matches_bose_einstein() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "heat",
        r#"{"group": "heisenberg-weyl", "experiment": "thermal", "beta_omega": 1.0,
            "sweep": {"beta_omega": [0.5, 1.0, 2.0, 4.0]}}"#,
    );
    let o = gcs(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = summary(dir.path(), "heat_sweep");
    for r in report["scenarios"].as_array().unwrap() {
        assert_eq!(r["summary"]["passed"], true, "{r}");
    }
}

#[test]
fn verify_passes_and_filters() {
    let dir = tempfile::tempdir().unwrap();
    let o = gcs(&["verify", "--filter", "typo"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("PASS")).count(), 3);
    assert!(gcs(&["verify"], dir.path()).status.success());
    assert_eq!(gcs(&["verify", "--filter", "nothing-here"], dir.path()).status.code(), Some(2));
}

#[test]
fn disc_grid_sweep_preserves_every_radius() {
    let dir = tempfile::tempdir().unwrap();
    let axis: Vec<String> = (0..8).map(|i| format!("{}", -0.6 + 1.2 * i as f64 / 7.0)).collect();
    let axis = axis.join(", ");
    let body = format!(
        r#"{{"group": "su11", "experiment": "classical", "track": {{"kind": "oscillator", "omega": 1.0}},
            "horizon": 3.0, "samples": 30, "sweep": {{"z0_re": [{axis}], "z0_im": [{axis}]}}}}"#
    );
    let cfg = scenario(dir.path(), "grid", &body);
    let o = gcs(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = summary(dir.path(), "grid_sweep");
    let runs = report["scenarios"].as_array().unwrap();
    assert_eq!(runs.len(), 64);
    for (i, r) in runs.iter().enumerate() {
        let csv = std::fs::read_to_string(dir.path().join(format!("grid_{i:04}.csv"))).unwrap();
        let radius = column(&csv, "abs_z");
        assert!(radius.iter().all(|x| (x - radius[0]).abs() < 1e-8), "{}", r["coords"]);
    }
}

#[test]
fn summary_echo_parses_back_to_the_same_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "echo",
        r#"{"group": "su11", "weights": [0.5, 1.25], "z0": [0.25, 0.1], "experiment": "observables",
            "track": {"kind": "su11", "h0": {"sinusoid": {"offset": 1.0, "amplitude": 0.3, "frequency": 2.0}}, "h": [0.1, 0.2]},
            "horizon": 2.0, "samples": 20}"#,
    );
    // same directory and stem as the config: refused rather than clobbered
    assert_eq!(gcs(&["simulate", cfg.to_str().unwrap()], cfg.parent().unwrap()).status.code(), Some(2));
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "echo");
    assert_eq!(s["passed"], true);
    let original = gcs_cli::load_config(&cfg).unwrap();
    let echoed = gcs_cli::parse_config(&s["config"].to_string()).unwrap();
    assert_eq!(original, echoed);
}

#[test]
fn mobius_and_riccati_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "two",
        r#"{"group": "oscillator", "z0": [0.2, -0.3], "experiment": "mobius-vs-riccati",
            "track": {"kind": "oscillator", "omega": {"piecewise": {"breaks": [2.0], "values": [1.0, 1.6]}}, "friction": 0.2},
            "horizon": 5.0, "samples": 50}"#,
    );
    let o = gcs(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(dir.path(), "two");
    assert!(s["sup_distance"].as_f64().unwrap() < 1e-8);
    let csv = std::fs::read_to_string(dir.path().join("two.csv")).unwrap();
    assert!(column(&csv, "poincare_distance").iter().all(|d| *d < 1e-8));
}
