//! Three-dimensional complex FFT on the cubic lattice, built from cached
//! one-dimensional rustfft plans.
//!
//! Layout is x-fastest: `idx = x + n*(y + n*z)`. Forward transforms are the
//! unnormalized DFT `X_k = sum_j x_j e^{-2pi i jk/n}` applied along each axis;
//! inverse transforms are the unnormalized adjoint. Normalization conventions
//! live in [`crate::field`].

use num_complex::Complex;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type PlanKey = (usize, bool);

static PLANS: Lazy<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Apply a 1-D FFT along every line of the given axis (0 = x, 1 = y, 2 = z).
fn transform_axis(data: &mut [Complex<f64>], n: usize, axis: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n * n);
    let fft = plan(n, inverse);
    let mut line = vec![Complex::default(); n];
    let mut scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];

    let stride = match axis {
        0 => 1,
        1 => n,
        2 => n * n,
        _ => unreachable!(),
    };
    // Enumerate line origins: all indices whose coordinate along `axis` is 0.
    for a in 0..n {
        for b in 0..n {
            let origin = match axis {
                0 => n * (a + n * b),
                1 => a + n * n * b,
                2 => a + n * b,
                _ => unreachable!(),
            };
            if stride == 1 {
                let seg = &mut data[origin..origin + n];
                fft.process_with_scratch(seg, &mut scratch);
            } else {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[origin + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, value) in line.iter().enumerate() {
                    data[origin + i * stride] = *value;
                }
            }
        }
    }
}

/// Unnormalized forward 3-D DFT in place.
pub fn forward(data: &mut [Complex<f64>], n: usize) {
    for axis in 0..3 {
        transform_axis(data, n, axis, false);
    }
}

/// Unnormalized inverse 3-D DFT in place (`inverse(forward(x)) = n^3 x`).
pub fn inverse(data: &mut [Complex<f64>], n: usize) {
    for axis in 0..3 {
        transform_axis(data, n, axis, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_scales_by_n_cubed() {
        let n = 8;
        let mut data: Vec<Complex<f64>> = (0..n * n * n)
            .map(|i| Complex::new((i % 7) as f64 - 3.0, (i % 5) as f64))
            .collect();
        let original = data.clone();
        forward(&mut data, n);
        inverse(&mut data, n);
        let scale = (n * n * n) as f64;
        for (a, b) in data.iter().zip(&original) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_of_plane_wave_is_delta() {
        let n = 8;
        // e^{2pi i (2x + y)/n} should transform to a single spike at (2,1,0).
        let mut data = vec![Complex::default(); n * n * n];
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let phase =
                        2.0 * std::f64::consts::PI * (2.0 * x as f64 + y as f64) / n as f64;
                    data[x + n * (y + n * z)] = Complex::from_polar(1.0, phase);
                }
            }
        }
        forward(&mut data, n);
        let spike = data[2 + n * 1];
        assert!((spike - Complex::new((n * n * n) as f64, 0.0)).norm() < 1e-9);
        let total: f64 = data.iter().map(|c| c.norm()).sum();
        assert!((total - spike.norm()).abs() < 1e-9);
    }
}
