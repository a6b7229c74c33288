//! Black-box tests of the `toa-mie` binary: output format contracts,
//! determinism under a fixed seed, and error reporting.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toa-mie"))
        .args(args)
        .output()
        .expect("binary should launch")
}

#[test]
fn curves_csv_contract() {
    let out = run(&[
        "curves",
        "--preset",
        "baseband",
        "--snr-min-db",
        "0",
        "--snr-max-db",
        "20",
        "--step-db",
        "5",
        "--mvn-points",
        "1024",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,mse_s2,rmse_s,sqrt_mse_ps,label"
    );
    let grid_len = 5; // 0,5,10,15,20 dB
    let rows: Vec<&str> = lines.collect();
    // Baseband emits crlb, ecrlb, e_u, e_ana, z1, b1, e_num.
    assert_eq!(rows.len(), 7 * grid_len, "row count");
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5, "bad row: {row}");
        let mse: f64 = fields[1].parse().unwrap();
        let rmse: f64 = fields[2].parse().unwrap();
        let rmse_ps: f64 = fields[3].parse().unwrap();
        assert!(mse > 0.0 && mse.is_finite());
        assert!((rmse - mse.sqrt()).abs() <= 1e-9 * rmse);
        assert!((rmse_ps - rmse * 1e12).abs() <= 1e-3 * rmse_ps.max(1e-6));
    }
    let labels: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r.rsplit(',').next().unwrap()).collect();
    for want in ["crlb", "ecrlb", "e_u", "e_ana", "z1", "b1", "e_num"] {
        assert!(labels.contains(want), "missing curve {want}");
    }
    // CRLB at 20 dB for the 1 ns baseband preset: 1/(ρ·βe²), βe² = 2π/T_w².
    let crlb_row = rows
        .iter()
        .find(|r| r.starts_with("20.0000") && r.ends_with(",crlb"))
        .unwrap();
    let mse: f64 = crlb_row.split(',').nth(1).unwrap().parse().unwrap();
    let expect = 1e-18 / (100.0 * 2.0 * std::f64::consts::PI);
    assert!((mse - expect).abs() <= 1e-9 * expect, "crlb row {mse} vs {expect}");
}

#[test]
fn passband_curves_include_envelope_reference() {
    let out = run(&[
        "curves",
        "--preset",
        "passband",
        "--snr-min-db",
        "10",
        "--snr-max-db",
        "14",
        "--step-db",
        "2",
        "--mvn-points",
        "1024",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.ends_with(",e_ana_env")));
}

#[test]
fn same_seed_is_byte_identical_different_seed_is_not() {
    let args = [
        "--seed",
        "42",
        "curves",
        "--preset",
        "baseband",
        "--snr-min-db",
        "10",
        "--snr-max-db",
        "14",
        "--step-db",
        "2",
        "--mvn-points",
        "1024",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must reproduce bytes");
    let mut other = args;
    other[1] = "43";
    let c = run(&other);
    assert!(c.status.success());
    assert_ne!(a.stdout, c.stdout, "different seed should perturb e_num");
}

#[test]
fn thresholds_analytic_only_csv() {
    let out = run(&[
        "thresholds",
        "--sweep",
        "lambda",
        "--min",
        "2",
        "--max",
        "4",
        "--step",
        "1",
        "--analytic-only",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_var,value,rho_pr_db,rho_am1_db,rho_am2_db,rho_as_db,provenance"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let mut prev_as = f64::MIN;
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 7, "bad row: {row}");
        assert_eq!(f[0], "lambda");
        assert_eq!(f[2], "", "analytic rows carry no a priori threshold");
        assert_eq!(f[6], "analytic");
        let am1: f64 = f[3].parse().unwrap();
        let am2: f64 = f[4].parse().unwrap();
        let as_: f64 = f[5].parse().unwrap();
        assert!(am1 <= am2 + 1e-9 && am2 <= as_ + 1e-9, "ordering in {row}");
        assert!(as_ > prev_as, "rho_as must grow with lambda");
        prev_as = as_;
    }
}

#[test]
fn design_json_sanity() {
    let out = run(&["design", "--rho0-db", "10", "--band", "3.1:10.6"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // 10 dB sits below the begin-ambiguity threshold: fill the band.
    assert!((v["B0_GHz"].as_f64().unwrap() - 7.5).abs() < 1e-9);
    assert!((v["fc0_GHz"].as_f64().unwrap() - 6.85).abs() < 1e-9);
    assert!(v["rmse_ps"].as_f64().unwrap() > 0.0);
    assert!(v["mse_ps2"].is_number());
}

#[test]
fn invalid_inputs_fail_with_diagnostics() {
    let bad_band = run(&["design", "--rho0-db", "20", "--band", "10.6:3.1"]);
    assert!(!bad_band.status.success());
    assert!(String::from_utf8_lossy(&bad_band.stderr).contains("error:"));

    let bad_preset = run(&["curves", "--preset", "nonexistent"]);
    assert!(!bad_preset.status.success());
    assert!(String::from_utf8_lossy(&bad_preset.stderr).contains("nonexistent"));

    let wide_b = run(&[
        "design",
        "--rho0-db",
        "20",
        "--band",
        "3.1:10.6",
        "--bandwidth",
        "9.0",
    ]);
    assert!(!wide_b.status.success(), "bandwidth wider than band must fail");
}
