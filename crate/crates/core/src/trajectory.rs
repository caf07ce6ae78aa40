//! Time-indexed families of spectral fields on `]0, T]`.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::ops;

/// Fields sampled on a strictly increasing positive time grid, all sharing
/// one grid and rank.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
    horizon: f64,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>, horizon: f64) -> Result<Self> {
        if times.is_empty() || fields.len() != times.len() {
            return Err(Error::EmptyTrajectory);
        }
        for w in times.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::TimeGridMismatch);
            }
        }
        if !(times[0] > 0.0) || *times.last().unwrap() > horizon * (1.0 + 1e-12) {
            return Err(Error::BeyondHorizon {
                t: *times.last().unwrap(),
                horizon,
            });
        }
        let grid = fields[0].grid();
        let rank = fields[0].rank();
        if fields.iter().any(|f| f.grid() != grid || f.rank() != rank) {
            return Err(Error::GridMismatch);
        }
        Ok(Trajectory {
            times,
            fields,
            horizon,
        })
    }

    /// The default time grid: geometric with ratio `2^{1/refine}` from
    /// `T / 2^{n_octaves}` up to `T` inclusive.
    pub fn geometric_times(horizon: f64, n_octaves: usize, refine: usize) -> Vec<f64> {
        let steps = n_octaves * refine;
        (0..=steps)
            .map(|i| horizon * (2.0f64).powf((i as f64 - steps as f64) / refine as f64))
            .collect()
    }

    pub fn zeros(grid: GridSpec, rank: u8, times: Vec<f64>, horizon: f64) -> Result<Self> {
        let fields = times.iter().map(|_| SpectralField::zeros(grid, rank)).collect();
        Trajectory::new(times, fields, horizon)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn grid(&self) -> GridSpec {
        self.fields[0].grid()
    }

    pub fn rank(&self) -> u8 {
        self.fields[0].rank()
    }

    pub fn field(&self, i: usize) -> &SpectralField {
        &self.fields[i]
    }

    pub fn field_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.fields[i]
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn same_time_grid(&self, other: &Trajectory) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs().max(b.abs()))
    }

    /// Pairwise linear combination `self + a * other` on a shared time grid.
    pub fn axpy(&self, a: f64, other: &Trajectory) -> Result<Trajectory> {
        if !self.same_time_grid(other) {
            return Err(Error::TimeGridMismatch);
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(x, y)| {
                let mut f = x.clone();
                f.axpy(a, y)?;
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.times.clone(), fields, self.horizon)
    }

    pub fn map_fields<F>(&self, f: F) -> Result<Trajectory>
    where
        F: Fn(&SpectralField) -> Result<SpectralField> + Sync,
    {
        let fields = self.fields.iter().map(f).collect::<Result<Vec<_>>>()?;
        Trajectory::new(self.times.clone(), fields, self.horizon)
    }

    /// Parabolic rescaling `(x, t) -> (2x, 4t)`: velocities double, tensor
    /// forcings quadruple (`F -> lambda^2 F(lambda x, lambda^2 t)`), times
    /// divide by four.
    pub fn rescale_dyadic(&self) -> Trajectory {
        let times: Vec<f64> = self.times.iter().map(|t| t / 4.0).collect();
        let extra = match self.rank() {
            2 => 2.0,
            _ => 1.0,
        };
        let fields = self
            .fields
            .iter()
            .map(|f| ops::rescale_dyadic(f).scaled(extra))
            .collect();
        Trajectory::new(times, fields, self.horizon / 4.0).expect("structure preserved")
    }

    /// `sup_t ||f(t)||_{L^2}` over the sampled times.
    pub fn linf_l2(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for f in &self.fields {
            worst = worst.max(ops::lp_norm(f, 2.0)?);
        }
        Ok(worst)
    }

    /// Space-time `L^2(Q_T)` norm: spatial Plancherel exactly, time by the
    /// trajectory quadrature (piecewise-linear coefficients, constant head).
    pub fn l2_qt(&self) -> f64 {
        let mut acc = 0.0f64;
        let sq: Vec<f64> = self.fields.iter().map(|f| f.plancherel_l2_sq()).collect();
        let cross: Vec<f64> = (1..self.fields.len())
            .map(|i| {
                let mut dot = 0.0f64;
                let a = &self.fields[i - 1];
                let b = &self.fields[i];
                for c in 0..a.num_components() {
                    for (x, y) in a.component(c).iter().zip(b.component(c)) {
                        dot += x.re * y.re + x.im * y.im;
                    }
                }
                dot * a.grid().volume()
            })
            .collect();
        // Head: constant extension of the first sample on [0, t_1].
        acc += self.times[0] * sq[0];
        for i in 1..self.times.len() {
            let dt = self.times[i] - self.times[i - 1];
            // Exact integral of the squared linear interpolant.
            acc += dt * (sq[i - 1] + cross[i - 1] + sq[i]) / 3.0;
        }
        acc.max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_spans_octaves() {
        let t = Trajectory::geometric_times(1.0, 8, 1);
        assert_eq!(t.len(), 9);
        assert!((t[0] - 1.0 / 256.0).abs() < 1e-15);
        assert!((t[8] - 1.0).abs() < 1e-15);
        let t2 = Trajectory::geometric_times(1.0, 8, 2);
        assert_eq!(t2.len(), 17);
    }

    #[test]
    fn rejects_unsorted_times() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let f = SpectralField::zeros(g, 1);
        let err = Trajectory::new(vec![0.5, 0.25], vec![f.clone(), f], 1.0);
        assert!(err.is_err());
    }

    #[test]
    fn l2_qt_of_constant_trajectory() {
        let g = GridSpec::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let mut f = SpectralField::zeros(g, 1);
        f.component_mut(0)[0] = num_complex::Complex::new(2.0, 0.0);
        let times = vec![0.25, 0.5, 0.75, 1.0];
        let fields = vec![f.clone(), f.clone(), f.clone(), f];
        let traj = Trajectory::new(times, fields, 1.0).unwrap();
        // ||f||_{L^2}^2 = 4 L^3, integrated over [0, 1].
        let expected = (4.0 * g.volume()).sqrt();
        assert!((traj.l2_qt() - expected).abs() / expected < 1e-12);
    }
}
