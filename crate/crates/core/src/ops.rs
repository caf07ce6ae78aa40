//! Field algebra on the periodic box: Lebesgue norms, differential
//! multipliers, Leray projection, heat semigroup, pressure recovery and the
//! dyadic rescaling.
//!
//! All operators act mode-by-mode in frequency space. The zero mode is
//! excluded from every homogeneous construction: the Leray symbol passes it
//! through, the inverse Laplacian and the pressure set it to zero.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use num_complex::Complex;

/// `L^p` norm from midpoint quadrature on the physical grid; `p = inf` takes
/// the sample maximum. The pointwise modulus is Euclidean (vectors) or
/// Frobenius (tensors).
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if !f.real_valued() {
        return Err(Error::NotRealValued);
    }
    assert!(p >= 1.0, "integrability index must satisfy p >= 1");
    let phys = f.to_physical();
    let m = f.grid().total_points();
    let mut modulus = vec![0.0f64; m];
    for comp in &phys {
        for (acc, v) in modulus.iter_mut().zip(comp) {
            *acc += v * v;
        }
    }
    if p.is_infinite() {
        Ok(modulus.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt())
    } else if p == 2.0 {
        let sum: f64 = modulus.iter().sum();
        Ok((sum * f.grid().cell_volume()).sqrt())
    } else {
        let half_p = 0.5 * p;
        let sum: f64 = modulus.iter().map(|&m2| m2.powf(half_p)).sum();
        Ok((sum * f.grid().cell_volume()).powf(1.0 / p))
    }
}

/// Frequency-wise orthogonal projection onto divergence-free vector fields,
/// `u_hat -> (I - xi xi^T / |xi|^2) u_hat`; the zero mode passes through.
pub fn leray_project(f: &SpectralField) -> Result<SpectralField> {
    if f.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: f.rank(),
        });
    }
    let mut out = f.clone();
    let grid = f.grid();
    for idx in 0..grid.total_points() {
        let xi = grid.wavevector(idx);
        let q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if q == 0.0 {
            continue;
        }
        let dot = f.component(0)[idx] * xi[0]
            + f.component(1)[idx] * xi[1]
            + f.component(2)[idx] * xi[2];
        for c in 0..3 {
            out.component_mut(c)[idx] -= dot * (xi[c] / q);
        }
    }
    out.set_divergence_free(true);
    Ok(out)
}

/// Heat semigroup `S(t)`: the multiplier `e^{-t |xi|^2}`. `t = 0` is the
/// identity (coefficients returned bitwise).
pub fn heat_apply(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let mut out = f.clone();
    if t == 0.0 {
        return Ok(out);
    }
    let grid = f.grid();
    for idx in 0..grid.total_points() {
        let w = (-t * grid.xi_sq(idx)).exp();
        for c in 0..out.num_components() {
            out.component_mut(c)[idx] *= w;
        }
    }
    Ok(out)
}

/// Gradient of a vector field: `(grad u)_{ij} = d_j u_i`, the multiplier
/// `i xi_j` on row `i`.
pub fn gradient(f: &SpectralField) -> Result<SpectralField> {
    if f.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: f.rank(),
        });
    }
    let grid = f.grid();
    let mut out = SpectralField::zeros(grid, 2);
    for idx in 0..grid.total_points() {
        let xi = grid.wavevector(idx);
        for i in 0..3 {
            let u = f.component(i)[idx];
            for j in 0..3 {
                out.component_mut(3 * i + j)[idx] = Complex::new(0.0, xi[j]) * u;
            }
        }
    }
    out.set_real_valued(f.real_valued());
    out.set_divergence_free(false);
    Ok(out)
}

/// Row-wise divergence of a tensor field: `(div F)_i = sum_j i xi_j F_hat_ij`.
pub fn divergence(f: &SpectralField) -> Result<SpectralField> {
    if f.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: f.rank(),
        });
    }
    let grid = f.grid();
    let mut out = SpectralField::zeros(grid, 1);
    for idx in 0..grid.total_points() {
        let xi = grid.wavevector(idx);
        for i in 0..3 {
            let mut acc = Complex::default();
            for j in 0..3 {
                acc += Complex::new(0.0, xi[j]) * f.component(3 * i + j)[idx];
            }
            out.component_mut(i)[idx] = acc;
        }
    }
    out.set_real_valued(f.real_valued());
    out.set_divergence_free(false);
    Ok(out)
}

/// Scalar divergence of a vector field: the multiplier `i xi .`.
pub fn divergence_vec(f: &SpectralField) -> Result<SpectralField> {
    if f.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: f.rank(),
        });
    }
    let grid = f.grid();
    let mut out = SpectralField::zeros(grid, 0);
    for idx in 0..grid.total_points() {
        let xi = grid.wavevector(idx);
        let mut acc = Complex::default();
        for c in 0..3 {
            acc += Complex::new(0.0, xi[c]) * f.component(c)[idx];
        }
        out.component_mut(0)[idx] = acc;
    }
    out.set_real_valued(f.real_valued());
    Ok(out)
}

/// `(-Delta)^{-1}` with the zero mode set to zero.
pub fn inverse_neg_laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for idx in 0..grid.total_points() {
        let q = grid.xi_sq(idx);
        let w = if q == 0.0 { 0.0 } else { 1.0 / q };
        for c in 0..out.num_components() {
            out.component_mut(c)[idx] *= w;
        }
    }
    out
}

/// Zero every mode outside the two-thirds ball, in place.
pub fn dealias(f: &mut SpectralField) {
    let grid = f.grid();
    for idx in 0..grid.total_points() {
        if !grid.keep_dealiased(idx) {
            for c in 0..f.num_components() {
                f.component_mut(c)[idx] = Complex::default();
            }
        }
    }
}

/// Dealiased pointwise tensor product `u (x) v` of two vector fields,
/// `(u (x) v)_{ij} = u_i v_j`.
pub fn tensor_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if u.rank() != 1 || v.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: u.rank().max(v.rank()),
        });
    }
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let up = u.to_physical();
    let vp = if std::ptr::eq(u, v) {
        None
    } else {
        Some(v.to_physical())
    };
    let vp_ref = vp.as_ref().unwrap_or(&up);
    let m = grid.total_points();
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let mut s = vec![0.0f64; m];
            for ((dst, &a), &b) in s.iter_mut().zip(&up[i]).zip(&vp_ref[j]) {
                *dst = a * b;
            }
            samples.push(s);
        }
    }
    let mut out = SpectralField::from_physical(grid, 2, &samples)?;
    dealias(&mut out);
    Ok(out)
}

/// Associated pressure: `q_hat = -(xi^T M_hat xi)/|xi|^2` with
/// `M = v (x) v - F`, zero mode set to zero. The tensor product of `v` is
/// dealiased like every other quadratic term.
pub fn pressure_from(v: &SpectralField, forcing: Option<&SpectralField>) -> Result<SpectralField> {
    if v.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: v.rank(),
        });
    }
    let defect = v.divergence_defect();
    if defect > 1e-10 {
        return Err(Error::NotDivergenceFree(defect));
    }
    let grid = v.grid();
    let mut m_tensor = tensor_product(v, v)?;
    if let Some(f) = forcing {
        if f.rank() != 2 {
            return Err(Error::RankMismatch {
                expected: 2,
                got: f.rank(),
            });
        }
        m_tensor.axpy(-1.0, f)?;
    }
    let mut out = SpectralField::zeros(grid, 0);
    for idx in 0..grid.total_points() {
        let xi = grid.wavevector(idx);
        let q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if q == 0.0 {
            continue;
        }
        let mut acc = Complex::default();
        for i in 0..3 {
            for j in 0..3 {
                acc += m_tensor.component(3 * i + j)[idx] * (xi[i] * xi[j]);
            }
        }
        out.component_mut(0)[idx] = -acc / q;
    }
    out.set_real_valued(v.real_valued());
    Ok(out)
}

/// One step of the parabolic rescaling, spatial part: represents
/// `x -> 2 f(2x)` on the half-size box. The frequency lattice maps
/// index-for-index (mode `k` at spacing `2pi/L` becomes mode `k` at spacing
/// `4pi/L`), so the coefficients are copied and doubled.
pub fn rescale_dyadic(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    out.scale(2.0);
    let halved = f.grid().halved_box();
    // Rebuild on the halved box with identical (doubled) coefficients.
    let mut res = SpectralField::zeros(halved, f.rank());
    for c in 0..f.num_components() {
        res.component_mut(c).copy_from_slice(out.component(c));
    }
    res.set_real_valued(f.real_valued());
    res.set_divergence_free(f.divergence_free());
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::synth;

    fn grid() -> GridSpec {
        GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn constant_field_l3_norm_is_box_measure_power() {
        let g = grid();
        let mut f = SpectralField::zeros(g, 1);
        f.component_mut(0)[0] = Complex::new(1.0, 0.0);
        let val = lp_norm(&f, 3.0).unwrap();
        // (L^3)^{1/3} = 2 pi for the unit constant on the 2pi box.
        assert!((val - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn sine_sup_norm_is_one() {
        let g = grid();
        let f = SpectralField::single_mode(g, 1, 0, [1, 0, 0], Complex::new(0.0, -0.5));
        // 0.5(-i e^{ix} + i e^{-ix}) = sin(x1).
        let val = lp_norm(&f, f64::INFINITY).unwrap();
        assert!((val - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l2_norm_matches_plancherel() {
        let g = grid();
        let f = synth::random_divfree_field(g, 7, 10, -2.0);
        let quad = lp_norm(&f, 2.0).unwrap();
        let freq = f.plancherel_l2_sq().sqrt();
        assert!((quad - freq).abs() / freq < 1e-10);
    }

    #[test]
    fn lp_norm_rejects_non_real_fields() {
        let g = grid();
        let mut f = SpectralField::zeros(g, 1);
        f.component_mut(0)[1] = Complex::new(1.0, 0.0); // no conjugate partner
        f.set_real_valued(false);
        assert!(matches!(lp_norm(&f, 2.0), Err(Error::NotRealValued)));
    }

    #[test]
    fn leray_annihilates_gradients() {
        let g = grid();
        let phi = synth::random_scalar_field(g, 3, 10, -2.0);
        // grad phi as a vector field: i xi phi_hat.
        let mut gradphi = SpectralField::zeros(g, 1);
        for idx in 0..g.total_points() {
            let xi = g.wavevector(idx);
            for c in 0..3 {
                gradphi.component_mut(c)[idx] = Complex::new(0.0, xi[c]) * phi.component(0)[idx];
            }
        }
        let before = lp_norm(&gradphi, 2.0).unwrap();
        let projected = leray_project(&gradphi).unwrap();
        let after = lp_norm(&projected, 2.0).unwrap();
        assert!(after <= 1e-10 * before);
    }

    #[test]
    fn leray_fixes_divergence_free_fields_and_is_idempotent() {
        let g = grid();
        let f = synth::random_divfree_field(g, 11, 10, -2.0);
        let once = leray_project(&f).unwrap();
        assert!(once.rel_coeff_distance(&f) < 1e-12);
        let twice = leray_project(&once).unwrap();
        assert!(twice.rel_coeff_distance(&once) < 1e-12);
    }

    #[test]
    fn leray_output_divergence_vanishes_modewise() {
        let g = grid();
        let raw = synth::random_vector_field(g, 13, 10, -2.0);
        let projected = leray_project(&raw).unwrap();
        assert!(projected.divergence_defect() <= 1e-10);
    }

    #[test]
    fn heat_at_zero_time_is_bitwise_identity() {
        let g = grid();
        let f = synth::random_divfree_field(g, 17, 10, -2.0);
        let h = heat_apply(&f, 0.0).unwrap();
        assert!(h.coeffs_equal(&f));
    }

    #[test]
    fn heat_scales_single_mode_by_symbol() {
        let g = grid();
        let f = SpectralField::single_mode(g, 1, 1, [1, 0, 0], Complex::new(0.3, 0.1));
        let h = heat_apply(&f, 0.5).unwrap();
        let idx = f.index_of([1, 0, 0]).unwrap();
        let expected = Complex::new(0.3, 0.1) * (-0.5f64).exp();
        assert!((h.component(1)[idx] - expected).norm() < 1e-15);
    }

    #[test]
    fn heat_semigroup_law() {
        let g = grid();
        let f = synth::random_divfree_field(g, 19, 10, -2.0);
        let two_step = heat_apply(&heat_apply(&f, 0.3).unwrap(), 0.7).unwrap();
        let one_step = heat_apply(&f, 1.0).unwrap();
        assert!(one_step.rel_coeff_distance(&two_step) < 1e-13);
    }

    #[test]
    fn heat_is_lp_contraction() {
        let g = grid();
        let f = synth::random_divfree_field(g, 23, 10, -2.0);
        for p in [1.0, 2.0, 4.0, 6.0, f64::INFINITY] {
            let before = lp_norm(&f, p).unwrap();
            let after = lp_norm(&heat_apply(&f, 0.2).unwrap(), p).unwrap();
            assert!(after <= before * (1.0 + 1e-9), "p = {p}");
        }
    }

    #[test]
    fn pressure_of_zero_velocity_is_zero() {
        let g = grid();
        let v = SpectralField::zeros(g, 1);
        let q = pressure_from(&v, None).unwrap();
        assert_eq!(lp_norm(&q, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn pressure_matches_operator_composition_oracle() {
        // q = (-Delta)^{-1} div div (-F) for v = 0, checked against two
        // successive spectral divergences and the inverse Laplacian.
        let g = grid();
        let v = SpectralField::zeros(g, 1);
        let mut f_tensor = synth::random_tensor_field(g, 29, 10, -2.0);
        // Symmetrize.
        let copy = f_tensor.clone();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let avg: Vec<Complex<f64>> = copy
                        .component(3 * i + j)
                        .iter()
                        .zip(copy.component(3 * j + i))
                        .map(|(a, b)| 0.5 * (a + b))
                        .collect();
                    f_tensor.component_mut(3 * i + j).copy_from_slice(&avg);
                }
            }
        }
        let q = pressure_from(&v, Some(&f_tensor)).unwrap();
        let div1 = divergence(&f_tensor).unwrap();
        let div2 = divergence_vec(&div1).unwrap();
        let mut oracle = inverse_neg_laplacian(&div2);
        oracle.scale(-1.0);
        assert!(oracle.rel_coeff_distance(&q) < 1e-12);
    }

    #[test]
    fn pressure_satisfies_distributional_identity() {
        // -Delta q = div div (v (x) v) for div-free v and F = 0.
        let g = grid();
        let v = synth::random_divfree_field(g, 31, 10, -2.0);
        let q = pressure_from(&v, None).unwrap();
        let vv = tensor_product(&v, &v).unwrap();
        let divdiv = divergence_vec(&divergence(&vv).unwrap()).unwrap();
        // -Delta q in frequency space: |xi|^2 q_hat.
        let mut lhs = q.clone();
        for idx in 0..g.total_points() {
            let w = g.xi_sq(idx);
            lhs.component_mut(0)[idx] *= w;
        }
        let scale = divdiv.max_coeff();
        let mut worst = 0.0f64;
        for idx in 0..g.total_points() {
            worst = worst.max((lhs.component(0)[idx] - divdiv.component(0)[idx]).norm());
        }
        assert!(worst / scale < 1e-10);
    }

    #[test]
    fn rescale_constant_doubles() {
        let g = grid();
        let mut f = SpectralField::zeros(g, 1);
        f.component_mut(0)[0] = Complex::new(1.0, 0.0);
        let r = rescale_dyadic(&f);
        assert!((r.grid().box_len() - std::f64::consts::PI).abs() < 1e-15);
        assert!((r.component(0)[0].re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rescale_preserves_critical_l3_norm() {
        let g = grid();
        let f = synth::random_divfree_field(g, 37, 10, -2.0);
        let a = lp_norm(&f, 3.0).unwrap();
        let b = lp_norm(&rescale_dyadic(&f), 3.0).unwrap();
        assert!((a - b).abs() / a < 1e-12);
    }

    #[test]
    fn rescale_commutes_with_heat_parabolically() {
        let g = grid();
        let f = synth::random_divfree_field(g, 41, 10, -2.0);
        let t = 0.17;
        let lhs = heat_apply(&rescale_dyadic(&f), t).unwrap();
        let rhs = rescale_dyadic(&heat_apply(&f, 4.0 * t).unwrap());
        assert!(lhs.rel_coeff_distance(&rhs) < 1e-12);
    }

    #[test]
    fn rescale_commutes_with_leray_exactly() {
        let g = grid();
        let f = synth::random_vector_field(g, 43, 10, -2.0);
        let a = rescale_dyadic(&leray_project(&f).unwrap());
        let b = leray_project(&rescale_dyadic(&f)).unwrap();
        assert!(a.coeffs_equal(&b));
    }

    #[test]
    fn tensor_product_is_dealiased() {
        let g = grid();
        let u = synth::random_divfree_field(g, 47, 10, -2.0);
        let w = tensor_product(&u, &u).unwrap();
        for idx in 0..g.total_points() {
            if !g.keep_dealiased(idx) {
                for c in 0..9 {
                    assert_eq!(w.component(c)[idx], Complex::default());
                }
            }
        }
    }

    #[test]
    fn gradient_then_divergence_is_laplacian_on_divfree() {
        let g = grid();
        let u = synth::random_divfree_field(g, 53, 10, -2.0);
        let lap = divergence(&gradient(&u).unwrap()).unwrap();
        let mut expected = u.clone();
        for idx in 0..g.total_points() {
            let w = -g.xi_sq(idx);
            for c in 0..3 {
                expected.component_mut(c)[idx] *= w;
            }
        }
        assert!(expected.rel_coeff_distance(&lap) < 1e-12);
    }
}
