//! Harness-level contracts: deterministic CSV bytes, fault injection,
//! usage-error exits and driver smoke runs on a small grid.

use bnslab_cli::drivers;
use bnslab_cli::report::csv_bytes;
use bnslab_cli::verify::{check_partition, Env};
use bnslab_core::fieldio::{GridConfig, RunConfig, ScenarioParams};
use bnslab_core::GridSpec;
use std::process::Command;

fn small_config(scenario: &str) -> RunConfig {
    RunConfig {
        grid: GridConfig {
            n: 16,
            box_len: 2.0 * std::f64::consts::PI,
        },
        scenario: scenario.to_string(),
        params: ScenarioParams::default(),
        out_dir: None,
        seed: Some(7),
    }
}

#[test]
fn corrupted_partition_fails_the_check() {
    let grid = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let env = Env::new(grid, 1);
    assert!(check_partition(&env, false).pass);
    let corrupted = check_partition(&env, true);
    assert!(!corrupted.pass);
    assert!(corrupted.value > 1e-10);
}

#[test]
fn identical_config_and_seed_give_identical_csv_bytes() {
    let cfg = small_config("norms");
    let a = drivers::dispatch(&cfg).unwrap();
    let b = drivers::dispatch(&cfg).unwrap();
    assert_eq!(csv_bytes(&a.rows), csv_bytes(&b.rows));
    let mut cfg2 = cfg.clone();
    cfg2.seed = Some(8);
    let c = drivers::dispatch(&cfg2).unwrap();
    assert_ne!(csv_bytes(&a.rows), csv_bytes(&c.rows));
}

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, b"").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_bnslab"))
        .args(["verify", "--config"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn scenario_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        serde_json::to_vec(&small_config("norms")).unwrap(),
    )
    .unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_bnslab"))
        .args(["solve", "--config"])
        .arg(&path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let cfg = br#"{"grid": {"n": 16, "box_len": 6.28}, "scenario": "norms", "bogus": 3}"#;
    assert!(RunConfig::from_json(cfg).is_err());
}

#[test]
fn picard_driver_emits_norm_tables() {
    let mut cfg = small_config("picard");
    cfg.params.amplitude = Some(0.02);
    let out = drivers::dispatch(&cfg).unwrap();
    assert!(out.report.pass);
    assert!(out.rows.iter().any(|r| r.quantity == "kato_norm"));
    assert!(out
        .rows
        .iter()
        .any(|r| r.quantity == "quadrature_refinement_delta"));
}

#[test]
fn picard_driver_zero_amplitude_emits_zero_tables() {
    let mut cfg = small_config("picard");
    cfg.params.amplitude = Some(0.0);
    let out = drivers::dispatch(&cfg).unwrap();
    for row in out.rows.iter().filter(|r| r.quantity == "kato_norm") {
        assert_eq!(row.value, 0.0);
    }
}

#[test]
fn split_driver_emits_certificates() {
    let mut cfg = small_config("split");
    cfg.params.n_sweep = Some(vec![0.5, 2.0]);
    let out = drivers::dispatch(&cfg).unwrap();
    assert!(out.report.pass);
    assert_eq!(out.certificates.len(), 2);
    assert!(out.rows.iter().any(|r| r.quantity == "reconstruction"));
}

#[test]
fn solve_driver_brackets_the_convergence_threshold() {
    let mut cfg = small_config("solve");
    cfg.params.amplitude = Some(0.02);
    cfg.params.tol = Some(1e-9);
    let out = drivers::dispatch(&cfg).unwrap();
    assert!(out.report.pass);
    let lo = out
        .rows
        .iter()
        .find(|r| r.quantity == "convergence_bracket_lo")
        .unwrap()
        .value;
    let hi = out
        .rows
        .iter()
        .find(|r| r.quantity == "convergence_bracket_hi")
        .unwrap()
        .value;
    assert!(lo >= 0.02);
    assert!(hi.is_nan() || hi > lo);
}

#[test]
fn emit_writes_atomic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config("norms");
    let out = drivers::dispatch(&cfg).unwrap();
    let written = drivers::emit(&cfg, &out, dir.path().to_str()).unwrap();
    assert!(written.join("norms.csv").exists());
    assert!(written.join("norms.report.json").exists());
    let bytes = std::fs::read(written.join("norms.csv")).unwrap();
    assert!(bytes.starts_with(b"scenario,quantity,indices,value\n"));
}

#[test]
fn norms_driver_emits_json_records_and_solve_persists_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config("norms");
    let out = drivers::dispatch(&cfg).unwrap();
    assert_eq!(out.norm_records.len(), 4);
    drivers::emit(&cfg, &out, dir.path().to_str()).unwrap();
    assert!(dir.path().join("norms.norms.json").exists());

    let mut cfg = small_config("solve");
    cfg.params.amplitude = Some(0.02);
    let out = drivers::dispatch(&cfg).unwrap();
    drivers::emit(&cfg, &out, dir.path().to_str()).unwrap();
    let path = dir.path().join("solve.solution.bnsf");
    assert!(path.exists());
    let traj = bnslab_core::fieldio::read_trajectory(&path).unwrap();
    assert!(traj.len() >= 8);
}
