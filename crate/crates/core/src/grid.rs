//! Periodic computational box and its frequency lattice.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the periodic box approximating free space.
///
/// Frequencies are `xi = (2 pi / L) * k` with integer `k` per axis in
/// `[-n/2, n/2 - 1]`. The zero mode is excluded from every homogeneous
/// construction (Leray symbol, inverse Laplacian, dyadic shells).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_per_dim: usize,
    box_len: f64,
    j_min: i32,
    j_max: i32,
}

/// Inner edge of the dyadic annulus `{3/4 * 2^j <= |xi| <= 8/3 * 2^j}`.
pub const SHELL_LO: f64 = 0.75;
/// Outer edge of the dyadic annulus.
pub const SHELL_HI: f64 = 8.0 / 3.0;

impl GridSpec {
    pub fn new(n_per_dim: usize, box_len: f64) -> Result<Self> {
        if n_per_dim < 8 || !n_per_dim.is_power_of_two() {
            return Err(Error::BadGrid(n_per_dim));
        }
        if !(box_len > 0.0) || !box_len.is_finite() {
            return Err(Error::BadBoxLen(box_len));
        }
        let (j_min, j_max) = resolvable_shells(n_per_dim, box_len);
        Ok(GridSpec {
            n_per_dim,
            box_len,
            j_min,
            j_max,
        })
    }

    pub fn n(&self) -> usize {
        self.n_per_dim
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn total_points(&self) -> usize {
        self.n_per_dim * self.n_per_dim * self.n_per_dim
    }

    pub fn freq_spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_len
    }

    pub fn nyquist(&self) -> usize {
        self.n_per_dim / 2
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.box_len / self.n_per_dim as f64;
        h * h * h
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    /// Resolvable dyadic range: shells whose annulus meets the nonzero lattice.
    pub fn shell_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    /// Integer wavenumber along one axis for array index `i`.
    #[inline]
    pub fn k_of_index(&self, i: usize) -> i64 {
        if i < self.n_per_dim / 2 {
            i as i64
        } else {
            i as i64 - self.n_per_dim as i64
        }
    }

    /// Wavevector `xi` for the linear coefficient index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let n = self.n_per_dim;
        let x = idx % n;
        let y = (idx / n) % n;
        let z = idx / (n * n);
        let d = self.freq_spacing();
        [
            self.k_of_index(x) as f64 * d,
            self.k_of_index(y) as f64 * d,
            self.k_of_index(z) as f64 * d,
        ]
    }

    /// `|xi|^2` for the linear coefficient index.
    #[inline]
    pub fn xi_sq(&self, idx: usize) -> f64 {
        let [a, b, c] = self.wavevector(idx);
        a * a + b * b + c * c
    }

    /// Largest integer wavenumber kept by the two-thirds dealiasing rule.
    pub fn dealias_cut(&self) -> i64 {
        (self.n_per_dim as i64) / 3
    }

    /// True when the mode passes the two-thirds rule on every axis.
    #[inline]
    pub fn keep_dealiased(&self, idx: usize) -> bool {
        let n = self.n_per_dim;
        let cut = self.dealias_cut();
        let x = self.k_of_index(idx % n).abs();
        let y = self.k_of_index((idx / n) % n).abs();
        let z = self.k_of_index(idx / (n * n)).abs();
        x <= cut && y <= cut && z <= cut
    }

    /// Grid for the half-size box produced by one dyadic rescaling step.
    pub fn halved_box(&self) -> GridSpec {
        GridSpec::new(self.n_per_dim, self.box_len / 2.0).expect("halving keeps the grid valid")
    }
}

fn resolvable_shells(n: usize, box_len: f64) -> (i32, i32) {
    let d = 2.0 * std::f64::consts::PI / box_len;
    // Smallest and largest |xi| over the nonzero lattice.
    let xi_min = d;
    let half = (n / 2) as f64;
    let xi_max = d * (3.0f64).sqrt() * half;
    // Shell j meets the lattice iff [SHELL_LO*2^j, SHELL_HI*2^j] intersects
    // some attained |xi|; scanning against the extremes is enough because the
    // lattice radii are dense at the scale of the annuli widths.
    let mut j_min = i32::MAX;
    let mut j_max = i32::MIN;
    for j in -60..=60 {
        let lo = SHELL_LO * (2.0f64).powi(j);
        let hi = SHELL_HI * (2.0f64).powi(j);
        if hi >= xi_min && lo <= xi_max {
            j_min = j_min.min(j);
            j_max = j_max.max(j);
        }
    }
    (j_min, j_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shell_range() {
        let g = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
        // Unit frequency spacing: lattice radii run from 1 to sqrt(3)*16.
        assert_eq!(g.shell_range(), (-1, 5));
        assert!((g.freq_spacing() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridSpec::new(12, 1.0).is_err());
        assert!(GridSpec::new(4, 1.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
    }

    #[test]
    fn halved_box_shifts_shells_up() {
        let g = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let h = g.halved_box();
        assert_eq!(h.shell_range(), (0, 6));
    }

    #[test]
    fn wavenumber_wraps_at_nyquist() {
        let g = GridSpec::new(16, 1.0).unwrap();
        assert_eq!(g.k_of_index(0), 0);
        assert_eq!(g.k_of_index(7), 7);
        assert_eq!(g.k_of_index(8), -8);
        assert_eq!(g.k_of_index(15), -1);
    }
}
