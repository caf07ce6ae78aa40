//! Littlewood-Paley machinery: the dyadic partition of unity, frequency
//! projectors, homogeneous Besov norms and the retraction/co-retraction pair
//! between fields and dyadic sequences.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{GridSpec, SHELL_HI, SHELL_LO};
use crate::ops;
use serde::Serialize;

/// Smooth transition based on `e^{-1/x}`: 0 at 0, 1 at 1.
fn smoothstep(x: f64) -> f64 {
    let h = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    let a = h(x);
    let b = h(1.0 - x);
    a / (a + b)
}

/// Radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, inf)`, smooth in between.
/// With `phi(r) = chi(r/2) - chi(r)` the dyadic sums telescope, so the
/// partition of unity is exact up to floating point on covered radii and the
/// support of `phi` is exactly the annulus `[3/4, 8/3]`.
pub fn chi(r: f64) -> f64 {
    const INNER: f64 = 0.75;
    const OUTER: f64 = 4.0 / 3.0;
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        smoothstep((OUTER - r) / (OUTER - INNER))
    }
}

/// The annulus bump `phi(r) = chi(r/2) - chi(r)`, supported in `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Regularity/integrability/summability triple `(s, p, q)` for `B^s_{p,q}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        assert!(p >= 1.0 && q >= 1.0);
        BesovIndex { s, p, q }
    }

    /// The critical index `(s_p, p, inf)` with `s_p = -1 + 3/p`.
    pub fn critical(p: f64) -> Self {
        BesovIndex::new(-1.0 + 3.0 / p, p, f64::INFINITY)
    }
}

/// Regularity exponent of the critical space at integrability `p`.
pub fn s_crit(p: f64) -> f64 {
    -1.0 + 3.0 / p
}

/// Regularity exponent of the critical forcing space at integrability `p`.
pub fn s_crit_forcing(p: f64) -> f64 {
    -2.0 + 3.0 / p
}

/// Tabulated multiplier values `phi(2^{-j}|xi|)` for the resolvable shells.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    tables: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn new(grid: GridSpec) -> Self {
        let (j_min, j_max) = grid.shell_range();
        let m = grid.total_points();
        let tables = (j_min..=j_max)
            .map(|j| {
                let scale = (2.0f64).powi(-j);
                let mut table = vec![0.0f64; m];
                for (idx, slot) in table.iter_mut().enumerate() {
                    let r = grid.xi_sq(idx).sqrt();
                    if r > 0.0 {
                        *slot = phi(scale * r);
                    }
                }
                table
            })
            .collect();
        DyadicPartition {
            grid,
            j_min,
            j_max,
            tables,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn shell_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn table(&self, j: i32) -> Result<&[f64]> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::ShellOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            });
        }
        Ok(&self.tables[(j - self.j_min) as usize])
    }

    /// Fault-injection hook for the verification harness: perturb one
    /// tabulated multiplier entry so partition-level checks must fail.
    pub fn corrupt_entry(&mut self, shell_offset: usize, delta: f64) {
        let slot = shell_offset % self.tables.len();
        let table = &mut self.tables[slot];
        // Pick a covered lattice entry so the corruption is observable.
        let idx = (0..table.len()).find(|&i| table[i] > 0.1).unwrap_or(1);
        table[idx] += delta;
    }

    /// True when every shell covering `|xi|` lies in the resolvable range, so
    /// the tabulated partition sums to one there.
    pub fn fully_covered(&self, r: f64) -> bool {
        r >= SHELL_HI * (2.0f64).powi(self.j_min - 1) && r <= SHELL_LO * (2.0f64).powi(self.j_max + 1)
    }

    /// Largest deviation of the tabulated partition sum from 1 over fully
    /// covered nonzero lattice frequencies.
    pub fn partition_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for idx in 0..self.grid.total_points() {
            let r = self.grid.xi_sq(idx).sqrt();
            if r == 0.0 || !self.fully_covered(r) {
                continue;
            }
            let sum: f64 = self.tables.iter().map(|t| t[idx]).sum();
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// Frequency projector `Delta_j`: coefficients multiplied by
    /// `phi(2^{-j}|xi|)`, exact zeros outside the shell annulus.
    pub fn project(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        let table = self.table(j)?;
        let mut out = f.clone();
        for c in 0..out.num_components() {
            for (v, &w) in out.component_mut(c).iter_mut().zip(table) {
                *v *= w;
            }
        }
        Ok(out)
    }

    /// Scalar-field convenience used by the synthesizers.
    pub fn project_scalar(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.project(f, j)
    }

    /// The fattened projector `Delta~_j = Delta_{j-1} + Delta_j + Delta_{j+1}`
    /// (neighbors outside the resolvable range contribute nothing).
    pub fn project_fattened(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::ShellOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            });
        }
        let m = self.grid.total_points();
        let mut weights = vec![0.0f64; m];
        for jj in (j - 1)..=(j + 1) {
            if jj < self.j_min || jj > self.j_max {
                continue;
            }
            for (w, &t) in weights.iter_mut().zip(self.table(jj)?) {
                *w += t;
            }
        }
        let mut out = f.clone();
        for c in 0..out.num_components() {
            for (v, &w) in out.component_mut(c).iter_mut().zip(&weights) {
                *v *= w;
            }
        }
        Ok(out)
    }
}

/// Per-shell `L^p` norms `(j, ||Delta_j f||_{L^p})`.
#[derive(Debug, Clone, Serialize)]
pub struct ShellNorms {
    pub p: f64,
    pub entries: Vec<(i32, f64)>,
}

/// A field decomposed into per-shell pieces.
///
/// Pieces produced by [`retraction`] are shell-supported (exact zeros outside
/// the annulus). Amplitude-threshold splittings produce sequences whose
/// pieces are no longer frequency-localized; the sequence-space norms do not
/// require localization.
#[derive(Debug, Clone)]
pub struct DyadicSequence {
    pub j_lo: i32,
    pub pieces: Vec<SpectralField>,
}

impl DyadicSequence {
    pub fn j_range(&self) -> (i32, i32) {
        (self.j_lo, self.j_lo + self.pieces.len() as i32 - 1)
    }

    pub fn piece(&self, j: i32) -> Option<&SpectralField> {
        let off = j - self.j_lo;
        if off < 0 {
            None
        } else {
            self.pieces.get(off as usize)
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let grid = self.pieces.first().ok_or(Error::EmptyTrajectory)?.grid();
        if self.pieces.iter().any(|p| p.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(grid)
    }

    pub fn zeros_like(&self) -> DyadicSequence {
        DyadicSequence {
            j_lo: self.j_lo,
            pieces: self
                .pieces
                .iter()
                .map(|p| SpectralField::zeros(p.grid(), p.rank()))
                .collect(),
        }
    }

    /// Per-shell `L^p` norms.
    pub fn shell_norms(&self, p: f64) -> Result<ShellNorms> {
        let entries = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, f)| Ok((self.j_lo + i as i32, ops::lp_norm(f, p)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ShellNorms { p, entries })
    }

    /// Sequence norm `|| (2^{js} ||u_j||_{L^p})_j ||_{l^q}`.
    pub fn seq_norm(&self, s: f64, p: f64, q: f64) -> Result<f64> {
        let norms = self.shell_norms(p)?;
        Ok(aggregate_lq(
            norms
                .entries
                .iter()
                .map(|&(j, v)| (2.0f64).powi(j).powf(s) * v),
            q,
        ))
    }

    /// Exact shell-wise sum of two sequences.
    pub fn add(&self, other: &DyadicSequence) -> Result<DyadicSequence> {
        if self.j_lo != other.j_lo || self.pieces.len() != other.pieces.len() {
            return Err(Error::GridMismatch);
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(DyadicSequence {
            j_lo: self.j_lo,
            pieces,
        })
    }
}

pub(crate) fn aggregate_lq<I: Iterator<Item = f64>>(values: I, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `R f = (Delta_j f)_j` over the resolvable range.
pub fn retraction(partition: &DyadicPartition, f: &SpectralField) -> Result<DyadicSequence> {
    let (j_min, j_max) = partition.shell_range();
    let pieces = (j_min..=j_max)
        .map(|j| partition.project(f, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicSequence {
        j_lo: j_min,
        pieces,
    })
}

/// `S (u_j)_j = sum_j Delta~_j u_j`; `S(R f) = f` on resolved mean-zero
/// content.
pub fn coretraction(partition: &DyadicPartition, seq: &DyadicSequence) -> Result<SpectralField> {
    let grid = seq.grid()?;
    if grid != partition.grid() {
        return Err(Error::GridMismatch);
    }
    let rank = seq.pieces[0].rank();
    let mut out = SpectralField::zeros(grid, rank);
    let (lo, hi) = seq.j_range();
    let (j_min, j_max) = partition.shell_range();
    for j in lo..=hi {
        if j < j_min || j > j_max {
            continue;
        }
        let piece = seq.piece(j).unwrap();
        if piece.rank() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                got: piece.rank(),
            });
        }
        let fattened = partition.project_fattened(piece, j)?;
        out.axpy(1.0, &fattened)?;
    }
    Ok(out)
}

/// Homogeneous Besov norm: `l^q` aggregation of `2^{js} ||Delta_j f||_{L^p}`
/// over the resolvable shells, together with the per-shell table.
pub fn besov_norm(
    partition: &DyadicPartition,
    f: &SpectralField,
    idx: &BesovIndex,
) -> Result<(f64, ShellNorms)> {
    if !f.real_valued() {
        return Err(Error::NotRealValued);
    }
    let seq = retraction(partition, f)?;
    let shell = seq.shell_norms(idx.p)?;
    let norm = aggregate_lq(
        shell
            .entries
            .iter()
            .map(|&(j, v)| (2.0f64).powi(j).powf(idx.s) * v),
        idx.q,
    );
    Ok((norm, shell))
}

/// Caloric characterization of negative-regularity Besov norms:
/// `max_t t^{-s/2} ||S(t) f||_{L^p}` over the sampled times.
pub fn heat_besov_norm(f: &SpectralField, s: f64, p: f64, time_grid: &[f64]) -> Result<f64> {
    if s >= 0.0 {
        return Err(Error::NonNegativeRegularity(s));
    }
    let mut worst = 0.0f64;
    for &t in time_grid {
        let value = t.powf(-s / 2.0) * ops::lp_norm(&ops::heat_apply(f, t)?, p)?;
        worst = worst.max(value);
    }
    Ok(worst)
}

/// Default heat-characterization grid: `count` log-spaced times from
/// `(2^{-j_max}/4)^2` to `(2^{-j_min} * 4)^2`, covering the resolvable shell
/// scales so every single-mode optimum `t* = -s/(2 |xi|^2) * ...` falls inside.
pub fn default_heat_grid(grid: GridSpec, count: usize) -> Vec<f64> {
    let (j_min, j_max) = grid.shell_range();
    let t_lo = ((2.0f64).powi(-j_max) / 4.0).powi(2);
    let t_hi = ((2.0f64).powi(-j_min) * 4.0).powi(2);
    let ratio = (t_hi / t_lo).ln();
    (0..count)
        .map(|i| t_lo * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect()
}
