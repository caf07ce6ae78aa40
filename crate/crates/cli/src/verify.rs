//! The verification suite: one function per acceptance check, all driven by
//! seeded ensembles so reports are reproducible bit-for-bit.

use crate::report::CheckResult;
use bnslab_core::field::SpectralField;
use bnslab_core::grid::GridSpec;
use bnslab_core::kato::{self, CarlesonScan, KatoIndex};
use bnslab_core::lp::{
    besov_norm, coretraction, default_heat_grid, heat_besov_norm, retraction, BesovIndex,
    DyadicPartition, DyadicSequence,
};
use bnslab_core::ops;
use bnslab_core::picard::{
    self, bilinear_b, duhamel_l, energy_residual, heat_flow, k_of_p, mild_solve, picard_bundle,
    PicardConfig,
};
use bnslab_core::splitting::{
    self, besov_split, diagonal_split, horizontal_split, initial_split_params, nondiagonal_split,
    split_forcing, split_initial_data, BesovSplitParams, DiagonalParams,
};
use bnslab_core::synth;
use bnslab_core::trajectory::Trajectory;
use std::time::Instant;

/// Shared inputs of every check.
#[derive(Clone, Copy)]
pub struct Env {
    pub grid: GridSpec,
    pub seed: u64,
}

impl Env {
    pub fn new(grid: GridSpec, seed: u64) -> Self {
        Env { grid, seed }
    }

    fn field(&self, stream: u64) -> SpectralField {
        synth::random_divfree_field(self.grid, self.seed.wrapping_add(stream), 10, -2.0)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx: f64 = xs.iter().sum::<f64>() / n;
    let my: f64 = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn coefficient_of_variation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Criterion 1: partition-of-unity residual over fully covered frequencies.
pub fn check_partition(env: &Env, corrupt: bool) -> CheckResult {
    let (residual, dt) = timed(|| {
        let mut partition = DyadicPartition::new(env.grid);
        if corrupt {
            partition.corrupt_entry(2, 1e-3);
        }
        partition.partition_residual()
    });
    CheckResult::new(
        "partition_of_unity",
        residual <= 1e-10 && dt < 1.0,
        residual,
        1e-10,
        format!("max |sum_j phi_j - 1| over covered lattice; corrupt={corrupt}"),
        dt,
    )
}

/// Criterion 2: retraction identity `S(R f) = f` on 20 seeded fields.
pub fn check_retraction(env: &Env) -> CheckResult {
    let (worst, dt) = timed(|| {
        let partition = DyadicPartition::new(env.grid);
        let mut worst = 0.0f64;
        for i in 0..20u64 {
            let f = env.field(10 + i);
            let back = coretraction(&partition, &retraction(&partition, &f).unwrap()).unwrap();
            let rel = back.sub(&f).unwrap().plancherel_l2_sq().sqrt()
                / f.plancherel_l2_sq().sqrt();
            worst = worst.max(rel);
        }
        worst
    });
    CheckResult::new(
        "retraction_identity",
        worst <= 1e-8 && dt < 10.0,
        worst,
        1e-8,
        "max_f |S(Rf) - f|_{L^2} / |f|_{L^2} over 20 seeded fields",
        dt,
    )
}

/// Criterion 3: heat/shell Besov norm equivalence at the critical index.
pub fn check_heat_besov(env: &Env) -> Vec<CheckResult> {
    let partition = DyadicPartition::new(env.grid);
    let tgrid = default_heat_grid(env.grid, 64);
    [4.0, 6.0]
        .iter()
        .map(|&p| {
            let (spread, dt) = timed(|| {
                let idx = BesovIndex::critical(p);
                let mut ratios = Vec::new();
                for i in 0..20u64 {
                    let f = env.field(40 + i);
                    let (bnorm, _) = besov_norm(&partition, &f, &idx).unwrap();
                    let hnorm = heat_besov_norm(&f, idx.s, idx.p, &tgrid).unwrap();
                    ratios.push(hnorm / bnorm);
                }
                let max = ratios.iter().cloned().fold(0.0, f64::max);
                let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                (max / min, min, max)
            });
            let (spread, min, max) = spread;
            CheckResult::new(
                &format!("heat_besov_equivalence_p{p}"),
                spread <= 3.0,
                spread,
                3.0,
                format!("ratio interval [{min:.4}, {max:.4}], width {spread:.4}"),
                dt,
            )
        })
        .collect()
}

/// Criterion 4: Kato interpolation inequality on 50 random trajectories.
pub fn check_interpolation(env: &Env) -> CheckResult {
    let (worst, dt) = timed(|| {
        let times = Trajectory::geometric_times(1.0, 8, 1);
        let idx1 = KatoIndex::new(0.0, 2.0);
        let idx2 = KatoIndex::critical(6.0);
        let mut worst = 0.0f64;
        for i in 0..50u64 {
            let traj = synth::random_trajectory(
                env.grid,
                env.seed.wrapping_add(100 + i),
                &times,
                1,
                -0.5,
            );
            let rep = kato::interp_check(&traj, idx1, idx2, 0.4).unwrap();
            worst = worst.max(rep.lhs / rep.rhs);
        }
        worst
    });
    CheckResult::new(
        "kato_interpolation",
        worst <= 1.0 + 1e-9,
        worst,
        1.0 + 1e-9,
        "max lhs/rhs over 50 random trajectories",
        dt,
    )
}

fn random_sequence(grid: GridSpec, seed: u64, shells: usize, j_lo: i32) -> DyadicSequence {
    let pieces = (0..shells)
        .map(|i| {
            let j = j_lo + i as i32;
            let f = synth::random_vector_field(grid, seed.wrapping_add(i as u64 * 131), 2, 0.0);
            f.scaled((2.0f64).powi(-j) * 0.7)
        })
        .collect();
    DyadicSequence { j_lo, pieces }
}

/// Flat critical sequence: `||u_j||_p = 2^{-js}` exactly, which saturates the
/// horizontal geometric sums.
fn flat_sequence(grid: GridSpec, seed: u64, shells: usize, j_lo: i32, s: f64, p: f64) -> DyadicSequence {
    let pieces = (0..shells)
        .map(|i| {
            let j = j_lo + i as i32;
            let f = synth::random_vector_field(grid, seed.wrapping_add(i as u64 * 157), 2, 0.0);
            let norm = ops::lp_norm(&f, p).unwrap();
            f.scaled((2.0f64).powi(j).powf(-s) / norm)
        })
        .collect();
    DyadicSequence { j_lo, pieces }
}

/// Rank-2 field with the vector field's components on the tensor diagonal;
/// the pointwise Frobenius modulus matches the vector's Euclidean modulus.
fn diagonal_tensor(f: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(f.grid(), 2);
    for c in 0..3 {
        out.component_mut(4 * c).copy_from_slice(f.component(c));
    }
    out
}

/// Criterion 5 battery: all six splitting certificates on 20 random inputs
/// each, constant stability, and the exponent regressions.
pub fn check_splitting(env: &Env) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let g8 = GridSpec::new(8, env.grid.box_len()).unwrap();
    let g16 = GridSpec::new(16, env.grid.box_len()).unwrap();

    // Lemma battery: horizontal.
    let (value, dt) = timed(|| {
        let mut fails = 0;
        for i in 0..20u64 {
            let seq = random_sequence(g8, env.seed.wrapping_add(200 + i), 20, -10);
            let (_f, _g, cert) = horizontal_split(&seq, 0.0, -0.75, 1.25, 8.0, 3.0).unwrap();
            if !cert.pass {
                fails += 1;
            }
        }
        fails
    });
    out.push(CheckResult::new(
        "split_horizontal_certificates",
        value == 0,
        value as f64,
        0.0,
        "failed certificates out of 20 (corrected geometric constants)",
        dt,
    ));

    // Diagonal.
    let (value, dt) = timed(|| {
        let mut fails = 0;
        for q in [1.0, f64::INFINITY] {
            for i in 0..20u64 {
                let seq = random_sequence(g8, env.seed.wrapping_add(300 + i), 8, -3);
                let params = DiagonalParams {
                    sigma: -2.0 / 3.0,
                    s_tilde: 0.0,
                    s_bar: -1.0,
                    p: 4.0,
                    p_tilde: 2.0,
                    p_bar: 8.0,
                    q,
                };
                let (_t, _b, cert) = diagonal_split(&seq, &params, 2.0).unwrap();
                if !cert.pass {
                    fails += 1;
                }
            }
        }
        fails
    });
    out.push(CheckResult::new(
        "split_diagonal_certificates",
        value == 0,
        value as f64,
        0.0,
        "failed certificates out of 40 (q = 1 and q = inf)",
        dt,
    ));

    // Non-diagonal.
    let (value, dt) = timed(|| {
        let mut fails = 0;
        for i in 0..20u64 {
            let seq = random_sequence(g8, env.seed.wrapping_add(400 + i), 12, -5);
            let (_f, _t, _b, cert) =
                nondiagonal_split(&seq, -0.5, 0.5, 0.0, -1.0, 4.0, 2.0, 8.0, 4.0, 2.0).unwrap();
            if !cert.pass {
                fails += 1;
            }
        }
        fails
    });
    out.push(CheckResult::new(
        "split_nondiagonal_certificates",
        value == 0,
        value as f64,
        0.0,
        "failed certificates out of 20",
        dt,
    ));

    // Besov splitting on fields, with constant stability. The box L^p norms
    // carry the volume factor, so amplitude thresholds enter the histogram
    // only for N below ~0.3; certificates are exercised in the active regime
    // (N = 0.1) for the constant audit and in the saturated regime (N = 2).
    let partition = DyadicPartition::new(env.grid);
    let ((fails, cov, recon), dt) = timed(|| {
        let params = BesovSplitParams {
            s: -0.25,
            p: 4.0,
            s_tilde: 0.0,
            p_tilde: 2.0,
            s_bar: -0.5,
            p_bar: 8.0,
        };
        let mut fails = 0;
        let mut ratios = Vec::new();
        let mut recon = 0.0f64;
        for i in 0..20u64 {
            let u = env.field(500 + i);
            for n_level in [0.1, 2.0] {
                let (_t, _b, cert) = besov_split(&partition, &u, &params, n_level).unwrap();
                if !cert.pass {
                    fails += 1;
                }
                recon = recon.max(cert.reconstruction_rel);
                if n_level == 0.1 {
                    // Implied constant of the fitted tilde bound, active regime.
                    ratios.push(cert.bounds[3].ratio);
                }
            }
        }
        (fails, coefficient_of_variation(&ratios), recon)
    });
    out.push(CheckResult::new(
        "split_besov_certificates",
        fails == 0 && cov <= 0.5 && recon <= 1e-10,
        cov,
        0.5,
        format!("fails {fails}, implied-constant CoV {cov:.3}, reconstruction {recon:.2e}"),
        dt,
    ));

    // Initial-data split on fields.
    let ((fails, cov, div), dt) = timed(|| {
        let mut fails = 0;
        let mut ratios = Vec::new();
        let mut div = 0.0f64;
        for i in 0..20u64 {
            let u0 = env.field(600 + i);
            for n_level in [0.1, 2.0] {
                let (t, b, cert) = split_initial_data(&partition, &u0, 4.0, n_level).unwrap();
                if !cert.pass {
                    fails += 1;
                }
                div = div.max(t.divergence_defect()).max(b.divergence_defect());
                if n_level == 0.1 {
                    ratios.push(cert.bounds[0].ratio);
                }
            }
        }
        (fails, coefficient_of_variation(&ratios), div)
    });
    out.push(CheckResult::new(
        "split_initial_data_certificates",
        fails == 0 && cov <= 0.5 && div <= 1e-10,
        cov,
        0.5,
        format!("fails {fails}, L^2-constant CoV {cov:.3}, max div defect {div:.2e}"),
        dt,
    ));

    // Forcing split.
    let ((fails, cov), dt) = timed(|| {
        let mut fails = 0;
        let mut ratios = Vec::new();
        let times = Trajectory::geometric_times(1.0, 8, 2);
        for i in 0..20u64 {
            let base = synth::random_tensor_field(g16, env.seed.wrapping_add(700 + i), 5, -2.0);
            let fields = times
                .iter()
                .map(|&t| base.scaled(t.powf(-1.0 + 3.0 / 12.0)))
                .collect();
            let traj = Trajectory::new(times.clone(), fields, 1.0).unwrap();
            for n_level in [0.1, 2.0] {
                let (_ft, _fb, cert) = split_forcing(&traj, 6.0, n_level, 1.0).unwrap();
                if !cert.pass {
                    fails += 1;
                }
                if n_level == 0.1 {
                    ratios.push(cert.bounds[0].ratio);
                }
            }
        }
        (fails, coefficient_of_variation(&ratios))
    });
    out.push(CheckResult::new(
        "split_forcing_certificates",
        fails == 0 && cov <= 0.5,
        cov,
        0.5,
        format!("fails {fails}, L^3L^2-constant CoV {cov:.3}"),
        dt,
    ));

    // Exponent regression: horizontal K-sweep on a flat critical sequence.
    let ((slope, target), dt) = timed(|| {
        let s = 0.0;
        let s0 = -0.75;
        let seq = flat_sequence(g8, env.seed.wrapping_add(800), 24, -12, s, 3.0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for m in -9..=0i32 {
            let k_level = (2.0f64).powi(m);
            let (f, _g, _c) = horizontal_split(&seq, s, s0, 1.25, k_level, 3.0).unwrap();
            xs.push(k_level.ln());
            ys.push(f.seq_norm(s0, 3.0, 1.0).unwrap().ln());
        }
        (ols_slope(&xs, &ys), s0 - s)
    });
    out.push(CheckResult::new(
        "split_horizontal_exponent",
        (slope - target).abs() <= 0.1 * target.abs(),
        slope,
        target,
        format!("K-sweep slope {slope:.4} vs predicted {target}"),
        dt,
    ));

    // Exponent regression: diagonal N-sweep with exact-Pareto pieces at the
    // aligned instance sigma = s~ = s- = 0 (lambda_j = 1 for every shell).
    // Thresholds are anchored to tail counts: the window runs from ~16000
    // exceeding samples down to ~150, where the empirical power law is clean.
    let ((slope, target), dt) = timed(|| {
        let p = 4.0;
        let params = DiagonalParams {
            sigma: 0.0,
            s_tilde: 0.0,
            s_bar: 0.0,
            p,
            p_tilde: 2.0,
            p_bar: 8.0,
            q: 1.0,
        };
        let pieces: Vec<SpectralField> = (0..3)
            .map(|i| {
                synth::pareto_ranked_field(env.grid, env.seed.wrapping_add(900 + i), 1, p, 10)
            })
            .collect();
        let norm_p = ops::lp_norm(&pieces[0], p).unwrap();
        let total = env.grid.total_points() as f64;
        let seq = DyadicSequence { j_lo: 0, pieces };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..8 {
            let count = 16000.0 * (150.0f64 / 16000.0).powf(i as f64 / 7.0);
            let tau = (total / count).powf(1.0 / p);
            let n_level = tau / norm_p;
            let (t, _b, _c) = diagonal_split(&seq, &params, n_level).unwrap();
            let norm = t.seq_norm(0.0, 2.0, 1.0).unwrap();
            if norm > 0.0 {
                xs.push(n_level.ln());
                ys.push(norm.ln());
            }
        }
        (ols_slope(&xs, &ys), 1.0 - p / 2.0)
    });
    out.push(CheckResult::new(
        "split_diagonal_exponent",
        (slope - target).abs() <= 0.1 * target.abs(),
        slope,
        target,
        format!("N-sweep slope {slope:.4} vs predicted {target}"),
        dt,
    ));

    // Exponent regression: forcing split over nearly aligned blocks
    // (three dyadic blocks keep the lambda_j offsets within 2/3 octave),
    // piecewise-constant in time within each block, exact-Pareto in space.
    let ((slope, target), dt) = timed(|| {
        let p = 4.0;
        let times = Trajectory::geometric_times(1.0, 2, 8);
        let profile: Vec<SpectralField> = (0..3)
            .map(|i| {
                let f = synth::pareto_ranked_field(
                    env.grid,
                    env.seed.wrapping_add(950 + i),
                    1,
                    p,
                    10,
                );
                diagonal_tensor(&f)
            })
            .collect();
        let sigma = -2.0 + 3.0 / p;
        let fields: Vec<SpectralField> = times
            .iter()
            .map(|&t| {
                let j = ((t / 1.0).log2() - 1e-12).ceil().max(-2.0) as i32;
                let block_time = (2.0f64).powi(j);
                profile[(j + 2) as usize].scaled(block_time.powf(0.5 * sigma))
            })
            .collect();
        let traj = Trajectory::new(times, fields, 1.0).unwrap();
        let norm_p = ops::lp_norm(&profile[2], p).unwrap();
        let total = env.grid.total_points() as f64;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..8 {
            let count = 16000.0 * (150.0f64 / 16000.0).powf(i as f64 / 7.0);
            let tau = (total / count).powf(1.0 / p);
            let n_level = tau / norm_p;
            let (ft, _fb, _c) = split_forcing(&traj, p, n_level, 1.0).unwrap();
            let norm = splitting::l3t_l2x_norm(&ft);
            if norm > 0.0 {
                xs.push(n_level.ln());
                ys.push(norm.ln());
            }
        }
        (ols_slope(&xs, &ys), 1.0 - p / 2.0)
    });
    out.push(CheckResult::new(
        "split_forcing_exponent",
        (slope - target).abs() <= 0.1 * target.abs(),
        slope,
        target,
        format!("N-sweep slope {slope:.4} vs predicted {target}"),
        dt,
    ));

    // Initial-data windowed sweep: the gamma_2 power needs the horizontal cut
    // to migrate through ~15 shells, which a 7-shell box cannot host; over
    // the active window the decay must run at least at the threshold rate
    // and the gamma_2-compensated ratio must stay bounded.
    let ((slope, comp_max), dt) = timed(|| {
        let p = 4.0;
        let params = initial_split_params(p).unwrap();
        let u0 = {
            let raw = synth::pareto_ranked_field(env.grid, env.seed.wrapping_add(980), 1, p, 10);
            let projected = ops::leray_project(&raw).unwrap();
            let l2 = ops::lp_norm(&projected, 2.0).unwrap();
            projected.scaled(1.0 / l2)
        };
        let anchor =
            ops::lp_norm(&u0, f64::INFINITY).unwrap() / ops::lp_norm(&u0, p).unwrap();
        let source = besov_norm(&partition, &u0, &BesovIndex::critical(p)).unwrap().0;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut comp = Vec::new();
        for m in 0..=5 {
            let n_level = anchor / 2.0 * (2.0f64).powf(-(m as f64) / 4.0);
            let (t, _b, _c) = split_initial_data(&partition, &u0, p, n_level).unwrap();
            let l2 = ops::lp_norm(&t, 2.0).unwrap();
            if l2 > 0.0 {
                xs.push(n_level.ln());
                ys.push(l2.ln());
                comp.push(l2 * n_level.powf(params.gamma2) / source);
            }
        }
        let slope = ols_slope(&xs, &ys);
        let comp_max = comp.iter().cloned().fold(0.0, f64::max);
        let comp_min = comp.iter().cloned().fold(f64::INFINITY, f64::min);
        (slope, comp_max / comp_min)
    });
    out.push(CheckResult::new(
        "split_initial_data_gamma2_window",
        slope <= -1.0 + 0.1 && comp_max <= 4.0,
        slope,
        -1.0,
        format!(
            "windowed N-sweep slope {slope:.4} (threshold rate -1 or faster); \
             compensated-ratio variation {comp_max:.3} <= 4"
        ),
        dt,
    ));

    out
}

/// Per-pair bilinear ratios `|B(u,v)|_{K_p} / (|u|_{K_p} |v|_{X_T})` over
/// seeded heat-flow pairs, at the given trajectory resolution.
pub fn bilinear_ratios(env: &Env, p: f64, stream: u64, pairs: usize, refine: usize) -> Vec<f64> {
    let times = Trajectory::geometric_times(1.0, 8, refine);
    let scan = CarlesonScan::coarse(env.grid, 1.0).unwrap();
    let idx = KatoIndex::critical(p);
    (0..pairs as u64)
        .map(|i| {
            let u = synth::heat_trajectory(&env.field(stream + 2 * i), &times, 1.0);
            let v = synth::heat_trajectory(&env.field(stream + 2 * i + 1), &times, 1.0);
            let b = bilinear_b(&u, &v).unwrap();
            let num = kato::kato_norm(&b, idx).unwrap();
            let den =
                kato::kato_norm(&u, idx).unwrap() * kato::carleson_norm(&v, &scan).unwrap().total;
            num / den
        })
        .collect()
}

/// Measured bilinear constant: max per-pair ratio over the seeded ensemble.
pub fn fit_bilinear_constant(env: &Env, p: f64, stream: u64, pairs: usize) -> f64 {
    bilinear_ratios(env, p, stream, pairs, 2)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Criterion 6: Picard contraction at calibrated small data. The fitted
/// bilinear constant must be insensitive to quadrature refinement: no pair
/// may exceed the fitted value by more than 5% when the time grid is doubled
/// (the measured-constant pollution question).
pub fn check_contraction(env: &Env) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let p = 6.0;
    let ((kappa, kappa_refined), dt_fit) = timed(|| {
        let coarse = bilinear_ratios(env, p, 2000, 20, 2);
        let refined = bilinear_ratios(env, p, 2000, 20, 4);
        (
            coarse.into_iter().fold(0.0f64, f64::max),
            refined.into_iter().fold(0.0f64, f64::max),
        )
    });
    out.push(CheckResult::new(
        "bilinear_constant_stability",
        kappa_refined <= 1.05 * kappa,
        kappa_refined / kappa,
        1.05,
        format!(
            "fitted kappa {kappa:.4}; quadrature-refined ensemble max {kappa_refined:.4}"
        ),
        dt_fit,
    ));

    let ((ratio_max, residual), dt) = timed(|| {
        let u0_raw = env.field(2200);
        let cfg = PicardConfig::new(1, 1.0, p);
        let p0 = heat_flow(&u0_raw, &cfg.times(), 1.0).unwrap();
        let norm = kato::kato_norm(&p0, KatoIndex::critical(p)).unwrap();
        let u0 = u0_raw.scaled(0.1 / (kappa * norm));
        let (_v, report) = mild_solve(&u0, None, &cfg).unwrap();
        let mut ratio_max = 0.0f64;
        for w in report.increments.windows(2) {
            if w[0] > 1e-13 {
                ratio_max = ratio_max.max(w[1] / w[0]);
            }
        }
        (ratio_max, report.residual)
    });
    out.push(CheckResult::new(
        "picard_contraction_ratio",
        ratio_max <= 0.5,
        ratio_max,
        0.5,
        "max successive K_6 increment ratio at |P_0|_{K_6} = 0.1/kappa",
        dt,
    ));
    out.push(CheckResult::new(
        "mild_solver_residual",
        residual <= 1e-8,
        residual,
        1e-8,
        "|v - P_0 + B(v,v)|_{K_6} at the fixed point",
        0.0,
    ));
    out
}

/// Scaling-window data for the `T^{1/4}` laws: shell-composed and
/// iteratively reweighted until the Kato profile `t^{-s_p/2} ||S(t)u||_p` is
/// flat across the resolvable scale window. A plain power-law envelope is not
/// enough: shell truncation at both ends of the box tilts the heat response,
/// and the quartic appearance of `u` in `||F_k||^2_{L^2(Q_T)}` amplifies any
/// tilt into the measured exponent.
fn scaling_window_field(env: &Env, stream: u64, p: f64) -> SpectralField {
    let grid = env.grid;
    let partition = DyadicPartition::new(grid);
    let w = synth::random_divfree_field(grid, env.seed.wrapping_add(stream), 10, -1.5);
    let s_p = -1.0 + 3.0 / p;
    let shells: Vec<i32> = (-1..=3).collect();
    let pieces: Vec<SpectralField> = shells
        .iter()
        .map(|&j| {
            let piece = partition.project(&w, j).unwrap();
            let n = ops::lp_norm(&piece, p).unwrap();
            piece.scaled(1.0 / n)
        })
        .collect();
    let mut weights: Vec<f64> = shells
        .iter()
        .map(|&j| (2.0f64).powi(j).powf(-s_p))
        .collect();
    for _ in 0..8 {
        let mut u = SpectralField::zeros(grid, 1);
        for (c, piece) in weights.iter().zip(&pieces) {
            u.axpy(*c, piece).unwrap();
        }
        let response: Vec<f64> = shells
            .iter()
            .map(|&j| {
                let t = 0.2 * (4.0f64).powi(-j);
                t.powf(-s_p / 2.0)
                    * ops::lp_norm(&ops::heat_apply(&u, t).unwrap(), p).unwrap()
            })
            .collect();
        let log_mean = response.iter().map(|v| v.ln()).sum::<f64>() / response.len() as f64;
        for (c, r) in weights.iter_mut().zip(&response) {
            *c *= ((log_mean - r.ln()) * 0.7).exp();
        }
    }
    let mut u = SpectralField::zeros(grid, 1);
    for (c, piece) in weights.iter().zip(&pieces) {
        u.axpy(*c, piece).unwrap();
    }
    let l2 = ops::lp_norm(&u, 2.0).unwrap();
    u.scaled(1.0 / l2)
}

/// Criterion 7: the `T^{1/4}` law of `||F_{k(p)}||_{L^2(Q_T)}`.
pub fn check_fk_scaling(env: &Env) -> Vec<CheckResult> {
    let t_list: Vec<f64> = (0..5).map(|i| (2.0f64).powi(i - 4)).collect();
    [4.0, 6.0]
        .iter()
        .map(|&p| {
            let (slope, dt) = timed(|| {
                let k = k_of_p(p).unwrap();
                let u0 = scaling_window_field(env, 2300, p).scaled(0.02);
                let cfg = PicardConfig::new(k, 1.0, p);
                let report = picard::fk_l2_scaling(&u0, None, k, &t_list, &cfg).unwrap();
                report.slope.unwrap_or(f64::NAN)
            });
            CheckResult::new(
                &format!("fk_l2_scaling_p{p}"),
                (0.2..=0.3).contains(&slope),
                slope,
                0.25,
                format!("log-log slope of |F_k|_{{L^2(Q_T)}} vs T, k = {}", k_of_p(p).unwrap()),
                dt,
            )
        })
        .collect()
}

/// Criterion 8: decay of the correction `sup_{t<=T} |v - P_{k(p)}|_{L^2}`.
pub fn check_decay(env: &Env) -> CheckResult {
    let (slope, dt) = timed(|| {
        let p = 6.0;
        let k = k_of_p(p).unwrap();
        let u0 = scaling_window_field(env, 2400, p).scaled(0.02);
        let cfg = PicardConfig::new(k, 1.0, p);
        let (v, _rep) = mild_solve(&u0, None, &cfg).unwrap();
        let bundle = picard_bundle(&u0, None, &cfg).unwrap();
        let u = v.axpy(-1.0, &bundle.iterates[k]).unwrap();
        let norms: Vec<f64> = u
            .fields()
            .iter()
            .map(|f| f.plancherel_l2_sq().sqrt())
            .collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..5i32 {
            let horizon = (2.0f64).powi(i - 4);
            let sup = u
                .times()
                .iter()
                .zip(&norms)
                .filter(|(&t, _)| t <= horizon * (1.0 + 1e-12))
                .map(|(_, &n)| n)
                .fold(0.0f64, f64::max);
            xs.push(horizon.ln());
            ys.push(sup.ln());
        }
        ols_slope(&xs, &ys)
    });
    CheckResult::new(
        "correction_decay",
        (0.2..=0.35).contains(&slope),
        slope,
        0.25,
        "slope of sup_{t<=T} |v - P_k|_{L^2} vs T (target exponent 1/4)",
        dt,
    )
}

/// Criterion 9: energy balance of mild solutions and perturbation detection.
pub fn check_energy(env: &Env) -> Vec<CheckResult> {
    let p = 6.0;
    let k = k_of_p(p).unwrap();
    let u0 = env.field(2500).scaled(0.05);
    let cfg = PicardConfig::new(k, 1.0, p);
    let ((worst, scale), dt) = timed(|| {
        let (v, _rep) = mild_solve(&u0, None, &cfg).unwrap();
        let report = energy_residual(&v, &u0, None, k, &cfg).unwrap();
        let worst = report
            .residuals
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (worst, report.energy_scale)
    });
    let mut out = vec![CheckResult::new(
        "energy_balance_mild",
        worst <= 1e-6 * scale,
        worst / scale.max(1e-300),
        1e-6,
        "max_t (LHS - RHS) / energy scale for the mild solution",
        dt,
    )];

    let (detected, dt) = timed(|| {
        let (v, _rep) = mild_solve(&u0, None, &cfg).unwrap();
        let delta = ops::leray_project(&SpectralField::single_mode(
            env.grid,
            1,
            1,
            [0, 0, 12],
            num_complex::Complex::new(0.01, 0.0),
        ))
        .unwrap();
        let perturbed = v
            .map_fields(|f| {
                let mut q = f.clone();
                q.axpy(1.0, &delta)?;
                Ok(q)
            })
            .unwrap();
        let report = energy_residual(&perturbed, &u0, None, k, &cfg).unwrap();
        *report.residuals.last().unwrap() / report.energy_scale
    });
    out.push(CheckResult::new(
        "energy_balance_adversarial",
        detected > 1e-4,
        detected,
        1e-4,
        "relative residual after a high-mode increment (must be positive)",
        dt,
    ));
    out
}

/// Criterion 10: operator covariance under the dyadic parabolic rescaling.
pub fn check_scaling_covariance(env: &Env) -> Vec<CheckResult> {
    let times = Trajectory::geometric_times(1.0, 8, 2);
    let mut out = Vec::new();

    let (worst, dt) = timed(|| {
        let f = env.field(2600);
        let t = 0.37;
        let lhs = ops::heat_apply(&ops::rescale_dyadic(&f), t).unwrap();
        let rhs = ops::rescale_dyadic(&ops::heat_apply(&f, 4.0 * t).unwrap());
        lhs.rel_coeff_distance(&rhs)
    });
    out.push(CheckResult::new(
        "scaling_covariance_heat",
        worst <= 1e-6,
        worst,
        1e-6,
        "heat semigroup vs parabolic rescaling",
        dt,
    ));

    let (worst, dt) = timed(|| {
        let forcing =
            synth::random_trajectory(env.grid, env.seed.wrapping_add(2700), &times, 2, -1.0);
        let lhs = duhamel_l(&forcing, &times).unwrap().rescale_dyadic();
        let rescaled_times: Vec<f64> = times.iter().map(|t| t / 4.0).collect();
        let rhs = duhamel_l(&forcing.rescale_dyadic(), &rescaled_times).unwrap();
        lhs.fields()
            .iter()
            .zip(rhs.fields())
            .map(|(a, b)| a.rel_coeff_distance(b))
            .fold(0.0, f64::max)
    });
    out.push(CheckResult::new(
        "scaling_covariance_duhamel",
        worst <= 1e-6,
        worst,
        1e-6,
        "Duhamel operator vs parabolic rescaling",
        dt,
    ));

    let (worst, dt) = timed(|| {
        let u = synth::heat_trajectory(&env.field(2800), &times, 1.0);
        let v = synth::heat_trajectory(&env.field(2801), &times, 1.0);
        let lhs = bilinear_b(&u, &v).unwrap().rescale_dyadic();
        let rhs = bilinear_b(&u.rescale_dyadic(), &v.rescale_dyadic()).unwrap();
        lhs.fields()
            .iter()
            .zip(rhs.fields())
            .map(|(a, b)| a.rel_coeff_distance(b))
            .fold(0.0, f64::max)
    });
    out.push(CheckResult::new(
        "scaling_covariance_bilinear",
        worst <= 1e-6,
        worst,
        1e-6,
        "bilinear operator vs parabolic rescaling",
        dt,
    ));
    out
}

/// Criterion 11: every output flagged divergence-free has mode-wise
/// divergence below 1e-10.
pub fn check_divergence_flags(env: &Env) -> CheckResult {
    let (worst, dt) = timed(|| {
        let mut worst = 0.0f64;
        let mut audit = |f: &SpectralField| {
            assert!(f.divergence_free());
            worst = worst.max(f.divergence_defect());
        };
        let projected = ops::leray_project(&synth::random_vector_field(
            env.grid,
            env.seed.wrapping_add(2900),
            10,
            -2.0,
        ))
        .unwrap();
        audit(&projected);

        let times = Trajectory::geometric_times(1.0, 8, 1);
        let forcing =
            synth::random_trajectory(env.grid, env.seed.wrapping_add(2901), &times, 2, -1.0);
        let l = duhamel_l(&forcing, &times).unwrap();
        for f in l.fields() {
            audit(f);
        }

        let u0 = env.field(2902).scaled(0.05);
        let cfg = PicardConfig::new(1, 1.0, 6.0);
        let bundle = picard_bundle(&u0, None, &cfg).unwrap();
        for traj in &bundle.iterates {
            for f in traj.fields() {
                audit(f);
            }
        }
        let (v, _) = mild_solve(&u0, None, &cfg).unwrap();
        for f in v.fields() {
            audit(f);
        }

        let partition = DyadicPartition::new(env.grid);
        let (t, b, _c) = split_initial_data(&partition, &u0, 4.0, 2.0).unwrap();
        audit(&t);
        audit(&b);
        worst
    });
    CheckResult::new(
        "divergence_flag_audit",
        worst <= 1e-10,
        worst,
        1e-10,
        "max mode-wise divergence over flagged outputs across the suite",
        dt,
    )
}

/// The full suite in acceptance order.
pub fn run_all(env: &Env, corrupt_partition: bool) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    checks.push(check_partition(env, corrupt_partition));
    checks.push(check_retraction(env));
    checks.extend(check_heat_besov(env));
    checks.push(check_interpolation(env));
    checks.extend(check_splitting(env));
    checks.extend(check_contraction(env));
    checks.extend(check_fk_scaling(env));
    checks.push(check_decay(env));
    checks.extend(check_energy(env));
    checks.extend(check_scaling_covariance(env));
    checks.push(check_divergence_flags(env));
    checks
}
