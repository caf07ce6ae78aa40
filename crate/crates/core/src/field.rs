//! Vector/tensor fields stored as Fourier coefficients on the box lattice.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::GridSpec;
use num_complex::Complex;

/// A field on the periodic box, stored component-wise in frequency space.
///
/// Coefficients are amplitudes: the mode `e^{i xi_k . x}` carries coefficient 1
/// at lattice index `k`. Rank 0 is a scalar (one component), rank 1 a vector
/// (three components), rank 2 a tensor (nine components, row-major: entry
/// `(i,j)` at `3i + j`).
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridSpec,
    rank: u8,
    comps: Vec<Vec<Complex<f64>>>,
    real_valued: bool,
    divergence_free: bool,
}

pub(crate) fn component_count(rank: u8) -> usize {
    match rank {
        0 => 1,
        1 => 3,
        2 => 9,
        _ => panic!("rank must be 0, 1 or 2"),
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec, rank: u8) -> Self {
        let m = grid.total_points();
        SpectralField {
            grid,
            rank,
            comps: vec![vec![Complex::default(); m]; component_count(rank)],
            real_valued: true,
            divergence_free: rank == 1,
        }
    }

    /// Build a field from physical samples (x-fastest layout, one slice per
    /// component). Real samples make the coefficients Hermitian by
    /// construction.
    pub fn from_physical(grid: GridSpec, rank: u8, samples: &[Vec<f64>]) -> Result<Self> {
        let m = grid.total_points();
        if samples.len() != component_count(rank) || samples.iter().any(|s| s.len() != m) {
            return Err(Error::RankMismatch {
                expected: rank,
                got: samples.len() as u8,
            });
        }
        let norm = 1.0 / m as f64;
        let comps = samples
            .iter()
            .map(|s| {
                let mut buf: Vec<Complex<f64>> =
                    s.iter().map(|&v| Complex::new(v, 0.0)).collect();
                fft::forward(&mut buf, grid.n());
                for c in buf.iter_mut() {
                    *c *= norm;
                }
                buf
            })
            .collect();
        Ok(SpectralField {
            grid,
            rank,
            comps,
            real_valued: true,
            divergence_free: false,
        })
    }

    /// Field carrying a single Fourier mode pair `amp * e^{i k.x} + c.c.` in
    /// one component (Hermitian, hence real-valued).
    pub fn single_mode(grid: GridSpec, rank: u8, comp: usize, k: [i64; 3], amp: Complex<f64>) -> Self {
        let mut f = SpectralField::zeros(grid, rank);
        f.divergence_free = false;
        let idx = f.index_of(k).expect("mode inside the lattice");
        f.comps[comp][idx] = amp;
        if let Some(neg) = f.index_of([-k[0], -k[1], -k[2]]) {
            if neg != idx {
                f.comps[comp][neg] = amp.conj();
            }
        }
        f
    }

    /// Linear index of integer mode `k`, if representable on this lattice.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.grid.n() as i64;
        let wrap = |c: i64| -> Option<usize> {
            if c >= -n / 2 && c < n / 2 {
                Some(((c + n) % n) as usize)
            } else {
                None
            }
        };
        let x = wrap(k[0])?;
        let y = wrap(k[1])?;
        let z = wrap(k[2])?;
        Some(x + self.grid.n() * (y + self.grid.n() * z))
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn num_components(&self) -> usize {
        self.comps.len()
    }

    pub fn real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn divergence_free(&self) -> bool {
        self.divergence_free
    }

    pub(crate) fn set_divergence_free(&mut self, flag: bool) {
        self.divergence_free = flag;
    }

    pub(crate) fn set_real_valued(&mut self, flag: bool) {
        self.real_valued = flag;
    }

    pub fn component(&self, c: usize) -> &[Complex<f64>] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<f64>] {
        &mut self.comps[c]
    }

    /// Physical samples of one component (synthesis transform). The imaginary
    /// parts are returned too so callers can audit Hermitian symmetry.
    pub fn to_physical_complex(&self, c: usize) -> Vec<Complex<f64>> {
        let mut buf = self.comps[c].clone();
        fft::inverse(&mut buf, self.grid.n());
        buf
    }

    /// Physical samples of every component, discarding imaginary round-off.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        (0..self.comps.len())
            .map(|c| {
                self.to_physical_complex(c)
                    .into_iter()
                    .map(|v| v.re)
                    .collect()
            })
            .collect()
    }

    /// Largest imaginary sample magnitude relative to the largest modulus;
    /// the computable face of the Hermitian-symmetry invariant.
    pub fn hermitian_defect(&self) -> f64 {
        let mut max_im: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for c in 0..self.comps.len() {
            for v in self.to_physical_complex(c) {
                max_im = max_im.max(v.im.abs());
                max_abs = max_abs.max(v.norm());
            }
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_im / max_abs
        }
    }

    /// `max_xi |xi . u_hat(xi)| / ||u_hat||_{l^2}`; zero for exactly projected
    /// fields up to round-off.
    pub fn divergence_defect(&self) -> f64 {
        assert_eq!(self.rank, 1, "divergence defect is for vector fields");
        let mut l2: f64 = 0.0;
        for c in &self.comps {
            for v in c {
                l2 += v.norm_sqr();
            }
        }
        let l2 = l2.sqrt();
        if l2 == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.total_points() {
            let xi = self.grid.wavevector(idx);
            let mut dot = Complex::default();
            for (c, x) in xi.iter().enumerate() {
                dot += self.comps[c][idx] * x;
            }
            worst = worst.max(dot.norm());
        }
        worst / l2
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.comps.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        for (dst, src) in self.comps.iter_mut().zip(&other.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
        self.real_valued &= other.real_valued;
        self.divergence_free &= other.divergence_free;
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Largest coefficient modulus across components.
    pub fn max_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Frequency-side quadratic form `L^3 sum |u_hat|^2`, the Plancherel value
    /// of `||f||_{L^2}^2`.
    pub fn plancherel_l2_sq(&self) -> f64 {
        let sum: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum();
        self.grid.volume() * sum
    }

    /// Exact coefficient equality (bitwise on the complex parts).
    pub fn coeffs_equal(&self, other: &SpectralField) -> bool {
        self.grid == other.grid
            && self.rank == other.rank
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.re == y.re && x.im == y.im))
    }

    /// Relative sup-coefficient distance, with the scale taken from `self`.
    pub fn rel_coeff_distance(&self, other: &SpectralField) -> f64 {
        let scale = self.max_coeff().max(1e-300);
        let mut worst: f64 = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).norm());
            }
        }
        worst / scale
    }
}
