//! Splitting-lemma checks: explicit sequence-space bounds, persistency,
//! reconstruction, the derived-parameter oracles, and the composed
//! Besov/initial-data/forcing splits.

use bnslab_core::field::SpectralField;
use bnslab_core::grid::GridSpec;
use bnslab_core::lp::{DyadicPartition, DyadicSequence};
use bnslab_core::ops;
use bnslab_core::splitting::{
    besov_split, diagonal_split, forcing_split_params, horizontal_split, initial_split_params,
    nondiagonal_split, split_forcing, split_initial_data, BesovSplitParams, DiagonalParams,
};
use bnslab_core::synth;
use bnslab_core::trajectory::Trajectory;
use bnslab_core::Error;

fn grid8() -> GridSpec {
    GridSpec::new(8, 2.0 * std::f64::consts::PI).unwrap()
}

fn grid16() -> GridSpec {
    GridSpec::new(16, 2.0 * std::f64::consts::PI).unwrap()
}

fn grid32() -> GridSpec {
    GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap()
}

/// A 20-shell synthetic sequence whose pieces are small random fields; the
/// sequence lemmas place no localization requirement on the pieces.
fn random_sequence(seed: u64, shells: usize, j_lo: i32) -> DyadicSequence {
    let g = grid8();
    let pieces = (0..shells)
        .map(|i| {
            // Weight the shells so the l^s_inf norm is spread, not dominated
            // by one extreme shell.
            let j = j_lo + i as i32;
            let f = synth::random_vector_field(g, seed.wrapping_add(i as u64 * 131), 2, 0.0);
            f.scaled((2.0f64).powi(-j) * 0.7)
        })
        .collect();
    DyadicSequence { j_lo, pieces }
}

fn single_entry_sequence(value_shell: i32, j_lo: i32, shells: usize) -> DyadicSequence {
    let g = grid8();
    let pieces = (0..shells)
        .map(|i| {
            if j_lo + i as i32 == value_shell {
                synth::random_vector_field(g, 5, 2, 0.0)
            } else {
                SpectralField::zeros(g, 1)
            }
        })
        .collect();
    DyadicSequence { j_lo, pieces }
}

#[test]
fn horizontal_split_index_cut_directions() {
    // Single nonzero entry at j = 0 with s0 < s < s1: K = 2 puts the cut at
    // kappa = 1, so the high tail f is empty; K = 1/2 flips it.
    let seq = single_entry_sequence(0, -5, 11);
    let (f, g, cert) = horizontal_split(&seq, 0.0, -1.0, 1.0, 2.0, 2.0).unwrap();
    assert!(f.pieces.iter().all(|p| p.max_coeff() == 0.0));
    assert!(g.piece(0).unwrap().max_coeff() > 0.0);
    assert!(cert.pass);

    let (f, g, cert) = horizontal_split(&seq, 0.0, -1.0, 1.0, 0.5, 2.0).unwrap();
    assert!(f.piece(0).unwrap().max_coeff() > 0.0);
    assert!(g.pieces.iter().all(|p| p.max_coeff() == 0.0));
    assert!(cert.pass);
}

#[test]
fn horizontal_split_rejects_regularity_outside_interval() {
    let seq = random_sequence(1, 5, 0);
    assert!(matches!(
        horizontal_split(&seq, 2.0, -1.0, 1.0, 2.0, 2.0),
        Err(Error::NotBetween { .. })
    ));
}

#[test]
fn horizontal_split_certificates_on_random_sequences() {
    // Twenty random 20-shell sequences against the corrected geometric-sum
    // constants, plus an independent hand-evaluated bound for one piece.
    for seed in 0..20u64 {
        let seq = random_sequence(100 + seed, 20, -10);
        let (f, _g, cert) = horizontal_split(&seq, 0.0, -0.75, 1.25, 8.0, 3.0).unwrap();
        assert!(cert.pass, "seed {seed}: {cert:?}");

        // Independent oracle: sum the shell norms directly.
        let source = seq.seq_norm(0.0, 3.0, f64::INFINITY).unwrap();
        let mut hand = 0.0;
        for (i, piece) in f.pieces.iter().enumerate() {
            let j = f.j_lo + i as i32;
            hand += (2.0f64).powi(j).powf(-0.75) * ops::lp_norm(piece, 3.0).unwrap();
        }
        let bound = 8.0f64.powf(-0.75) / (1.0 - (2.0f64).powf(-0.75)) * source;
        assert!(hand <= bound * (1.0 + 1e-9), "seed {seed}");
        assert!((hand - cert.bounds[0].measured).abs() <= 1e-12 * hand.max(1.0));
    }
}

#[test]
fn horizontal_persistency_is_exact() {
    let seq = random_sequence(7, 20, -10);
    let source = seq.seq_norm(0.3, 4.0, f64::INFINITY).unwrap();
    let (f, g, _c) = horizontal_split(&seq, 0.3, -0.5, 1.0, 4.0, 4.0).unwrap();
    assert!(f.seq_norm(0.3, 4.0, f64::INFINITY).unwrap() <= source);
    assert!(g.seq_norm(0.3, 4.0, f64::INFINITY).unwrap() <= source);
}

fn diag_params(p: f64, q: f64) -> DiagonalParams {
    // Equal-summability triple, colinear by construction: sigma on the
    // segment from (s~, 1/p~) to (s-, 1/p-) at height 1/p.
    let (s_tilde, p_tilde) = (0.0, 2.0);
    let (s_bar, p_bar) = (-1.0, 2.0 * p);
    let theta = (1.0 / p - 1.0 / p_bar) / (1.0 / p_tilde - 1.0 / p_bar);
    DiagonalParams {
        sigma: theta * s_tilde + (1.0 - theta) * s_bar,
        s_tilde,
        s_bar,
        p,
        p_tilde,
        p_bar,
        q,
    }
}

#[test]
fn diagonal_split_extreme_levels() {
    let seq = random_sequence(11, 6, -2);
    let params = diag_params(4.0, 1.0);
    // Thresholds above every amplitude: nothing exceeds, g~ = 0.
    let (tilde, bar, cert) = diagonal_split(&seq, &params, 1e9).unwrap();
    assert!(tilde.pieces.iter().all(|p| p.max_coeff() == 0.0));
    for (b, s) in bar.pieces.iter().zip(&seq.pieces) {
        assert!(b.rel_coeff_distance(s) < 1e-13);
    }
    assert!(cert.pass);
    // Thresholds below every nonzero amplitude: everything exceeds, g- ~ 0.
    let (tilde, bar, cert) = diagonal_split(&seq, &params, 1e-9).unwrap();
    let scale = seq.pieces[0].max_coeff();
    assert!(bar.pieces.iter().all(|p| p.max_coeff() < 1e-10 * scale));
    for (t, s) in tilde.pieces.iter().zip(&seq.pieces) {
        assert!(t.rel_coeff_distance(s) < 1e-10);
    }
    assert!(cert.pass);
}

#[test]
fn diagonal_split_rejects_colinearity_violation() {
    let seq = random_sequence(13, 6, -2);
    let mut params = diag_params(4.0, 1.0);
    params.sigma += 0.05;
    match diagonal_split(&seq, &params, 2.0) {
        Err(Error::NotColinear(res)) => assert!((res - 0.05).abs() < 1e-12),
        other => panic!("expected colinearity error, got {other:?}"),
    }
}

#[test]
fn diagonal_split_certificates_on_random_sequences() {
    // Both target bounds with the equal-summability weights
    // lambda_j^{1-p/p~} = 2^{j(sigma-s~)} and c = 1, for q = 1 and q = inf.
    for q in [1.0, f64::INFINITY] {
        for seed in 0..20u64 {
            let seq = random_sequence(300 + seed, 8, -3);
            let params = diag_params(4.0, q);
            for n_level in [0.5, 1.0, 4.0] {
                let (_t, _b, cert) = diagonal_split(&seq, &params, n_level).unwrap();
                assert!(cert.pass, "q {q} seed {seed} N {n_level}: {cert:?}");
                assert!(cert.persistency_pass);
                assert!(cert.reconstruction_rel <= 1e-10);
            }
        }
    }
}

#[test]
fn diagonal_split_passes_empty_shells_to_bounded_piece() {
    let mut seq = random_sequence(17, 6, -2);
    seq.pieces[2] = SpectralField::zeros(grid8(), 1);
    let params = diag_params(4.0, 1.0);
    let (tilde, bar, cert) = diagonal_split(&seq, &params, 1.0).unwrap();
    assert_eq!(tilde.pieces[2].max_coeff(), 0.0);
    assert_eq!(bar.pieces[2].max_coeff(), 0.0);
    assert!(cert.pass);
}

#[test]
fn nondiagonal_split_zero_and_single_shell() {
    let g = grid8();
    let zero = DyadicSequence {
        j_lo: -2,
        pieces: (0..6).map(|_| SpectralField::zeros(g, 1)).collect(),
    };
    let (f, t, b, cert) =
        nondiagonal_split(&zero, -0.5, 0.5, 0.0, -1.0, 4.0, 2.0, 8.0, 2.0, 2.0).unwrap();
    for seq in [&f, &t, &b] {
        assert!(seq.pieces.iter().all(|p| p.max_coeff() == 0.0));
    }
    assert!(cert.pass);

    let seq = single_entry_sequence(0, -2, 6);
    let (f, t, b, _cert) =
        nondiagonal_split(&seq, -0.5, 0.5, 0.0, -1.0, 4.0, 2.0, 8.0, 2.0, 2.0).unwrap();
    // Reconstruction is exact shell-wise and only one side of the horizontal
    // cut holds the shell.
    let f_active = f.pieces.iter().any(|p| p.max_coeff() > 0.0);
    let tb_active = t
        .pieces
        .iter()
        .zip(&b.pieces)
        .any(|(a, c)| a.max_coeff() > 0.0 || c.max_coeff() > 0.0);
    assert!(f_active != tb_active);
    for i in 0..6 {
        let mut sum = f.pieces[i].clone();
        sum.axpy(1.0, &t.pieces[i]).unwrap();
        sum.axpy(1.0, &b.pieces[i]).unwrap();
        if seq.pieces[i].max_coeff() == 0.0 {
            assert!(sum.max_coeff() < 1e-14);
        } else {
            assert!(sum.rel_coeff_distance(&seq.pieces[i]) < 1e-12);
        }
    }
}

#[test]
fn nondiagonal_split_certificates_on_random_sequences() {
    for seed in 0..20u64 {
        let seq = random_sequence(700 + seed, 12, -5);
        let (_f, _t, _b, cert) =
            nondiagonal_split(&seq, -0.5, 0.5, 0.0, -1.0, 4.0, 2.0, 8.0, 4.0, 2.0).unwrap();
        assert!(cert.pass, "seed {seed}: {cert:?}");
    }
}

#[test]
fn besov_split_zero_field() {
    let g = grid32();
    let partition = DyadicPartition::new(g);
    let params = BesovSplitParams {
        s: -0.25,
        p: 4.0,
        s_tilde: 0.0,
        p_tilde: 2.0,
        s_bar: -0.5,
        p_bar: 8.0,
    };
    let (t, b, cert) = besov_split(&partition, &SpectralField::zeros(g, 1), &params, 2.0).unwrap();
    assert_eq!(t.max_coeff(), 0.0);
    assert_eq!(b.max_coeff(), 0.0);
    assert!(cert.pass);
}

#[test]
fn besov_split_rejects_region_violation() {
    let g = grid32();
    let partition = DyadicPartition::new(g);
    let params = BesovSplitParams {
        s: -0.25,
        p: 4.0,
        s_tilde: 0.0,
        p_tilde: 2.0,
        // Above the alpha line at this height: outside the region.
        s_bar: 0.2,
        p_bar: 8.0,
    };
    match besov_split(&partition, &SpectralField::zeros(g, 1), &params, 2.0) {
        Err(Error::RegionCondition { lo, hi, .. }) => {
            assert!(lo < hi);
        }
        other => panic!("expected region error, got {other:?}"),
    }
}

#[test]
fn besov_split_reconstructs_random_fields() {
    let g = grid32();
    let partition = DyadicPartition::new(g);
    let params = BesovSplitParams {
        s: -0.25,
        p: 4.0,
        s_tilde: 0.0,
        p_tilde: 2.0,
        s_bar: -0.5,
        p_bar: 8.0,
    };
    for seed in 0..10u64 {
        let u = synth::random_divfree_field(g, 900 + seed, 10, -2.0);
        for n_level in [1.0, 2.0, 8.0] {
            let (t, b, cert) = besov_split(&partition, &u, &params, n_level).unwrap();
            let sum = t.add(&b).unwrap();
            let rel = sum.sub(&u).unwrap().plancherel_l2_sq().sqrt()
                / u.plancherel_l2_sq().sqrt();
            assert!(rel <= 1e-10, "seed {seed} N {n_level}: {rel}");
            assert!(cert.reconstruction_rel <= 1e-10);
            assert!(cert.pass, "seed {seed} N {n_level}: {cert:?}");
        }
    }
}

#[test]
fn initial_split_parameters_match_hand_computation() {
    // p = 6: s_p = -1/2, p- = 12, s_12 = -3/4, s. = -5/8, s- = -11/16,
    // s0 = -7/16, exponents reproduced by the parameter computer.
    let params = initial_split_params(6.0).unwrap();
    assert!((params.s - (-0.5)).abs() < 1e-14);
    assert!((params.p_bar - 12.0).abs() < 1e-14);
    assert!((params.s_dot - (-0.625)).abs() < 1e-14);
    assert!((params.s_bar - (-0.6875)).abs() < 1e-14);
    assert!((params.s0 - (-0.4375)).abs() < 1e-14);
    assert!((params.s1 - (-0.55)).abs() < 1e-12);
    assert!((params.delta2 - 0.0625).abs() < 1e-14);
    assert!(params.delta2 > 0.0 && params.delta2 < 0.75);
    assert!(params.gamma1 > 0.0);
    assert!(params.gamma2 > 0.0);
    // gamma2 = -( (s1-s)/(s0-s1) * 1/2 + (1 - p/2) ) = 2 + 1/2 * 0.05/0.1125.
    let expected_gamma2 = 2.0 + 0.5 * (0.05 / 0.1125);
    assert!((params.gamma2 - expected_gamma2).abs() < 1e-10);
    assert!(initial_split_params(3.0).is_err());
}

#[test]
fn initial_split_zero_data_and_divergence() {
    let g = grid32();
    let partition = DyadicPartition::new(g);
    let zero = SpectralField::zeros(g, 1);
    let (t, b, _c) = split_initial_data(&partition, &zero, 6.0, 2.0).unwrap();
    assert_eq!(t.max_coeff(), 0.0);
    assert_eq!(b.max_coeff(), 0.0);

    for seed in 0..5u64 {
        let u0 = synth::random_divfree_field(g, 1100 + seed, 10, -2.0);
        let (t, b, cert) = split_initial_data(&partition, &u0, 4.0, 2.0).unwrap();
        assert!(t.divergence_defect() <= 1e-10);
        assert!(b.divergence_defect() <= 1e-10);
        assert!(cert.reconstruction_rel <= 1e-10);
        assert!(cert.pass, "seed {seed}: {cert:?}");
    }
}

#[test]
fn forcing_split_parameters_match_line_oracle() {
    // p = 6: the segment from (s_6', 1/6) = (-3/2, 1/6) to (-7/12, 1/2),
    // evaluated at 1/12, gives s- = -3/2 - 11/48.
    let params = forcing_split_params(6.0).unwrap();
    let slope = (-7.0 / 12.0 + 1.5) / (0.5 - 1.0 / 6.0);
    let oracle = -1.5 + slope * (1.0 / 12.0 - 1.0 / 6.0);
    assert!((params.s_bar - oracle).abs() < 1e-14);
    assert!((params.s_bar - (-1.5 - 11.0 / 48.0)).abs() < 1e-14);
    assert!(params.delta3 > 0.0);
    assert!((params.p3 - 12.0).abs() < 1e-14);
}

fn forcing_trajectory(seed: u64, grid: GridSpec, horizon: f64) -> Trajectory {
    let times = Trajectory::geometric_times(horizon, 8, 2);
    let q = 6.0;
    let base = synth::random_tensor_field(grid, seed, 5, -2.0);
    let fields = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let wiggle = 1.0 + 0.3 * ((i as f64) * 0.7).sin();
            base.scaled(t.powf(-1.0 + 3.0 / (2.0 * q)) * wiggle)
        })
        .collect();
    Trajectory::new(times, fields, horizon).unwrap()
}

#[test]
fn forcing_split_zero_and_random() {
    let g = grid16();
    let horizon = 1.0;
    let times = Trajectory::geometric_times(horizon, 8, 2);
    let zero = Trajectory::zeros(g, 2, times, horizon).unwrap();
    let (t, b, _c) = split_forcing(&zero, 6.0, 2.0, horizon).unwrap();
    for (a, c) in t.fields().iter().zip(b.fields()) {
        assert_eq!(a.max_coeff(), 0.0);
        assert_eq!(c.max_coeff(), 0.0);
    }

    for seed in 0..10u64 {
        let f = forcing_trajectory(1300 + seed, g, horizon);
        for n_level in [0.5, 2.0, 8.0] {
            let (ft, fb, cert) = split_forcing(&f, 6.0, n_level, horizon).unwrap();
            // Exact per-sample reconstruction.
            for i in 0..f.len() {
                let sum = ft.field(i).add(fb.field(i)).unwrap();
                assert!(sum.rel_coeff_distance(f.field(i)) <= 1e-12);
            }
            assert!(cert.pass, "seed {seed} N {n_level}: {cert:?}");
            assert!(cert.persistency_pass);
        }
    }
}

#[test]
fn forcing_split_extreme_levels() {
    let g = grid16();
    let f = forcing_trajectory(77, g, 1.0);
    let (ft, fb, _c) = split_forcing(&f, 6.0, 1e9, 1.0).unwrap();
    let scale = f.field(0).max_coeff();
    for a in ft.fields() {
        assert!(a.max_coeff() < 1e-12 * scale);
    }
    for (a, b) in fb.fields().iter().zip(f.fields()) {
        assert!(a.rel_coeff_distance(b) < 1e-12);
    }
}

#[test]
fn forcing_split_rejects_time_grid_with_block_gaps() {
    // Samples at t = 0.1 (block -3) and t = 0.9 (block 0) leave blocks -2
    // and -1 empty.
    let g = grid16();
    let f = synth::random_tensor_field(g, 5, 5, -2.0);
    let traj = Trajectory::new(vec![0.1, 0.9], vec![f.clone(), f], 1.0).unwrap();
    assert!(matches!(
        split_forcing(&traj, 6.0, 2.0, 1.0),
        Err(Error::BlockGridIncompatible { .. })
    ));
}
