//! Property-based invariants over seeded ensembles: norm homogeneity and
//! interpolation, semigroup contraction and composition, projector
//! idempotence, splitting reconstruction/persistency, and byte determinism.

use bnslab_core::field::SpectralField;
use bnslab_core::grid::GridSpec;
use bnslab_core::lp::{besov_norm, BesovIndex, DyadicPartition, DyadicSequence};
use bnslab_core::ops;
use bnslab_core::splitting::{diagonal_split, horizontal_split, DiagonalParams};
use bnslab_core::synth;
use bnslab_core::{fieldio, Trajectory};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(16, 2.0 * std::f64::consts::PI).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn lp_norm_is_absolutely_homogeneous(seed in 0u64..1000, alpha in -4.0f64..4.0) {
        prop_assume!(alpha.abs() > 1e-3);
        let f = synth::random_divfree_field(grid(), seed, 5, -2.0);
        for p in [1.0, 2.0, 3.0, 6.0, f64::INFINITY] {
            let a = ops::lp_norm(&f.scaled(alpha), p).unwrap();
            let b = alpha.abs() * ops::lp_norm(&f, p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }
    }

    #[test]
    fn lp_norms_interpolate(seed in 0u64..1000, theta in 0.05f64..0.95) {
        let f = synth::random_divfree_field(grid(), seed, 5, -2.0);
        let (p1, p2) = (2.0, 6.0);
        let inv_p = theta / p1 + (1.0 - theta) / p2;
        let p = 1.0 / inv_p;
        let lhs = ops::lp_norm(&f, p).unwrap();
        let rhs = ops::lp_norm(&f, p1).unwrap().powf(theta)
            * ops::lp_norm(&f, p2).unwrap().powf(1.0 - theta);
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }

    #[test]
    fn heat_contracts_and_composes(seed in 0u64..1000, s in 1e-4f64..0.5, t in 1e-4f64..0.5) {
        let f = synth::random_divfree_field(grid(), seed, 5, -2.0);
        let fs = ops::heat_apply(&f, s).unwrap();
        for p in [2.0, 4.0, f64::INFINITY] {
            prop_assert!(
                ops::lp_norm(&fs, p).unwrap()
                    <= ops::lp_norm(&f, p).unwrap() * (1.0 + 1e-9)
            );
        }
        let two_step = ops::heat_apply(&fs, t).unwrap();
        let one_step = ops::heat_apply(&f, s + t).unwrap();
        prop_assert!(one_step.rel_coeff_distance(&two_step) < 1e-13);
    }

    #[test]
    fn leray_is_idempotent_and_kills_divergence(seed in 0u64..1000) {
        let f = synth::random_vector_field(grid(), seed, 5, -2.0);
        let once = ops::leray_project(&f).unwrap();
        let twice = ops::leray_project(&once).unwrap();
        prop_assert!(twice.rel_coeff_distance(&once) < 1e-12);
        prop_assert!(once.divergence_defect() <= 1e-10);
    }

    #[test]
    fn besov_summability_is_monotone(seed in 0u64..1000, s in -1.5f64..0.5) {
        let g = grid();
        let partition = DyadicPartition::new(g);
        let f = synth::random_divfree_field(g, seed, 5, -2.0);
        let p = 4.0;
        let n_inf = besov_norm(&partition, &f, &BesovIndex::new(s, p, f64::INFINITY)).unwrap().0;
        let n_two = besov_norm(&partition, &f, &BesovIndex::new(s, p, 2.0)).unwrap().0;
        let n_one = besov_norm(&partition, &f, &BesovIndex::new(s, p, 1.0)).unwrap().0;
        prop_assert!(n_inf <= n_two * (1.0 + 1e-12));
        prop_assert!(n_two <= n_one * (1.0 + 1e-12));
    }

    #[test]
    fn splits_reconstruct_and_persist(seed in 0u64..1000, k_level in 0.1f64..64.0, n_level in 0.01f64..16.0) {
        let g = GridSpec::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let pieces: Vec<SpectralField> = (0..8)
            .map(|i| {
                let f = synth::random_vector_field(g, seed.wrapping_add(i * 71), 2, 0.0);
                f.scaled((2.0f64).powi(-(i as i32 - 3)))
            })
            .collect();
        let seq = DyadicSequence { j_lo: -3, pieces };
        let p = 4.0;

        let source = seq.seq_norm(0.0, p, f64::INFINITY).unwrap();
        let (f_seq, g_seq, h_cert) = horizontal_split(&seq, 0.0, -1.0, 1.0, k_level, p).unwrap();
        prop_assert!(h_cert.pass);
        for i in 0..seq.pieces.len() {
            let sum = f_seq.pieces[i].add(&g_seq.pieces[i]).unwrap();
            prop_assert!(sum.coeffs_equal(&seq.pieces[i]));
        }
        prop_assert!(f_seq.seq_norm(0.0, p, f64::INFINITY).unwrap() <= source);

        let theta = (1.0 / p - 1.0 / 8.0) / (1.0 / 2.0 - 1.0 / 8.0);
        let params = DiagonalParams {
            sigma: theta * 0.5 + (1.0 - theta) * -1.0,
            s_tilde: 0.5,
            s_bar: -1.0,
            p,
            p_tilde: 2.0,
            p_bar: 8.0,
            q: 1.0,
        };
        let (t_seq, b_seq, d_cert) = diagonal_split(&seq, &params, n_level).unwrap();
        prop_assert!(d_cert.pass, "{d_cert:?}");
        prop_assert!(d_cert.reconstruction_rel <= 1e-10);
        for i in 0..seq.pieces.len() {
            let denom = ops::lp_norm(&seq.pieces[i], p).unwrap();
            prop_assert!(ops::lp_norm(&t_seq.pieces[i], p).unwrap() <= denom * (1.0 + 1e-12));
            prop_assert!(ops::lp_norm(&b_seq.pieces[i], p).unwrap() <= denom * (1.0 + 1e-12));
        }
    }

    #[test]
    fn field_bytes_are_deterministic_and_roundtrip(seed in 0u64..1000) {
        let f = synth::random_divfree_field(grid(), seed, 5, -2.0);
        let bytes = fieldio::field_to_bytes(&f);
        prop_assert_eq!(&bytes, &fieldio::field_to_bytes(&f));
        let back = fieldio::field_from_bytes(&bytes).unwrap();
        prop_assert!(back.rel_coeff_distance(&f) <= 1e-13);
    }

    #[test]
    fn kato_rescaling_invariance(seed in 0u64..1000) {
        let g = grid();
        let f = synth::random_divfree_field(g, seed, 5, -2.0);
        let times = Trajectory::geometric_times(1.0, 8, 1);
        let traj = synth::heat_trajectory(&f, &times, 1.0);
        let idx = bnslab_core::kato::KatoIndex::critical(6.0);
        let a = bnslab_core::kato::kato_norm(&traj, idx).unwrap();
        let b = bnslab_core::kato::kato_norm(&traj.rescale_dyadic(), idx).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * a);
    }
}
