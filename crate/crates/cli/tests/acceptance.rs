//! Acceptance gate: drives the `verify` suite end-to-end through the binary
//! (one run at n = 32, box 2pi), maps its checks onto the acceptance
//! criteria, prints one pass/fail line per criterion, and asserts them all.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

struct Check {
    pass: bool,
    value: f64,
    runtime_s: f64,
}

fn run_verify(out_dir: &std::path::Path) -> (BTreeMap<String, Check>, bool, f64) {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_bnslab"))
        .args(["verify", "--seed", "1", "--out"])
        .arg(out_dir)
        .status()
        .expect("binary runs");
    let elapsed = start.elapsed().as_secs_f64();
    let report: serde_json::Value = serde_json::from_slice(
        &std::fs::read(out_dir.join("verify.report.json")).expect("report emitted"),
    )
    .expect("report parses");
    let mut checks = BTreeMap::new();
    for c in report["checks"].as_array().expect("checks array") {
        checks.insert(
            c["id"].as_str().unwrap().to_string(),
            Check {
                pass: c["pass"].as_bool().unwrap(),
                value: c["value"].as_f64().unwrap_or(f64::NAN),
                runtime_s: c["runtime_s"].as_f64().unwrap_or(0.0),
            },
        );
    }
    (checks, status.success(), elapsed)
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let (checks, exit_ok, elapsed) = run_verify(dir.path());

    let mut failures = Vec::new();
    let mut criterion = |n: usize, label: &str, ids: &[&str], extra: Option<(&str, bool)>| {
        let mut pass = true;
        let mut details = Vec::new();
        for id in ids {
            match checks.get(*id) {
                Some(c) => {
                    pass &= c.pass;
                    details.push(format!("{id}={:.3e}", c.value));
                }
                None => {
                    pass = false;
                    details.push(format!("{id}=MISSING"));
                }
            }
        }
        if let Some((what, ok)) = extra {
            pass &= ok;
            details.push(what.to_string());
        }
        println!(
            "{} criterion {:2}: {} [{}]",
            if pass { "PASS" } else { "FAIL" },
            n,
            label,
            details.join(", ")
        );
        if !pass {
            failures.push(n);
        }
    };

    criterion(
        1,
        "partition of unity residual <= 1e-10, < 1 s",
        &["partition_of_unity"],
        None,
    );
    criterion(
        2,
        "retraction identity <= 1e-8 on 20 fields, < 10 s",
        &["retraction_identity"],
        None,
    );
    criterion(
        3,
        "heat/shell Besov equivalence ratios in one interval, spread <= 3",
        &["heat_besov_equivalence_p4", "heat_besov_equivalence_p6"],
        None,
    );
    criterion(
        4,
        "Kato interpolation inequality on 50 trajectories",
        &["kato_interpolation"],
        None,
    );
    let split_ids = [
        "split_horizontal_certificates",
        "split_diagonal_certificates",
        "split_nondiagonal_certificates",
        "split_besov_certificates",
        "split_initial_data_certificates",
        "split_forcing_certificates",
        "split_horizontal_exponent",
        "split_diagonal_exponent",
        "split_forcing_exponent",
        "split_initial_data_gamma2_window",
    ];
    let split_runtime: f64 = split_ids
        .iter()
        .filter_map(|id| checks.get(*id))
        .map(|c| c.runtime_s)
        .sum();
    criterion(
        5,
        "splitting certificates + exponent regressions, < 2 min total",
        &split_ids,
        Some((
            &format!("battery runtime {split_runtime:.1}s"),
            split_runtime < 120.0,
        )),
    );
    criterion(
        6,
        "Picard contraction ratio <= 0.5 and mild residual <= 1e-8",
        &[
            "bilinear_constant_stability",
            "picard_contraction_ratio",
            "mild_solver_residual",
        ],
        None,
    );
    let fk_runtime: f64 = ["fk_l2_scaling_p4", "fk_l2_scaling_p6"]
        .iter()
        .filter_map(|id| checks.get(*id))
        .map(|c| c.runtime_s)
        .sum();
    criterion(
        7,
        "F_k space-time law, slope in [0.2, 0.3] for p in {4, 6}, < 2 min",
        &["fk_l2_scaling_p4", "fk_l2_scaling_p6"],
        Some((&format!("runtime {fk_runtime:.1}s"), fk_runtime < 120.0)),
    );
    criterion(
        8,
        "correction decay slope in [0.2, 0.35]",
        &["correction_decay"],
        None,
    );
    criterion(
        9,
        "energy balance <= 1e-6 x scale; adversarial residual positive",
        &["energy_balance_mild", "energy_balance_adversarial"],
        None,
    );
    criterion(
        10,
        "scaling covariance of heat, Duhamel, bilinear <= 1e-6",
        &[
            "scaling_covariance_heat",
            "scaling_covariance_duhamel",
            "scaling_covariance_bilinear",
        ],
        None,
    );
    criterion(
        11,
        "divergence flags <= 1e-10 across the suite",
        &["divergence_flag_audit"],
        None,
    );
    criterion(
        12,
        "end-to-end verify at n=32: exit 0 within 10 minutes",
        &[],
        Some((
            &format!("exit_ok={exit_ok}, elapsed {elapsed:.0}s"),
            exit_ok && elapsed <= 600.0,
        )),
    );

    assert!(
        failures.is_empty(),
        "acceptance criteria failed: {failures:?}"
    );
}
