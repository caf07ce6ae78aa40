//! Time-weighted norms on trajectories: Kato norms, forcing norms, the
//! Koch-Tataru-type Carleson norm and the interpolation inequality verifier.
//!
//! Essential suprema over time become maxima over the trajectory's sampled
//! times; every claim is stated relative to the sampling grid.

use crate::error::{Error, Result};
use crate::lp::{s_crit, s_crit_forcing};
use crate::ops;
use crate::trajectory::Trajectory;
use serde::Serialize;

/// Weight exponent / integrability pair for `K^s_p` norms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KatoIndex {
    pub s: f64,
    pub p: f64,
}

impl KatoIndex {
    pub fn new(s: f64, p: f64) -> Self {
        assert!(p >= 1.0);
        KatoIndex { s, p }
    }

    /// The critical index `(s_p, p)` with `s_p = -1 + 3/p`.
    pub fn critical(p: f64) -> Self {
        KatoIndex::new(s_crit(p), p)
    }

    /// The critical forcing index `(s_p', p)` with `s_p' = -2 + 3/p`.
    pub fn forcing(p: f64) -> Self {
        KatoIndex::new(s_crit_forcing(p), p)
    }
}

/// `max_t t^{-s/2} ||u(t)||_{L^p}` over the sampled times.
pub fn kato_norm(traj: &Trajectory, idx: KatoIndex) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut worst = 0.0f64;
    for (i, &t) in traj.times().iter().enumerate() {
        let v = t.powf(-idx.s / 2.0) * ops::lp_norm(traj.field(i), idx.p)?;
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Forcing norm `F_q`: weight `t^{1 - 3/(2q)}`, i.e. the Kato norm at
/// `s = s_q' = -2 + 3/q`.
pub fn fspace_norm(traj: &Trajectory, q: f64) -> Result<f64> {
    kato_norm(traj, KatoIndex::forcing(q))
}

/// General forcing norm `F^s_p`.
pub fn fspace_norm_at(traj: &Trajectory, s: f64, p: f64) -> Result<f64> {
    kato_norm(traj, KatoIndex::new(s, p))
}

/// Centers and radii for the Carleson-norm scan.
#[derive(Debug, Clone)]
pub struct CarlesonScan {
    /// Physical-cell indices of the scan centers.
    pub centers: Vec<[usize; 3]>,
    /// Ball radii, each below half the box length.
    pub radii: Vec<f64>,
}

impl CarlesonScan {
    /// Coarse default: an 8^3 center lattice and 6 dyadic radii
    /// `2^{-m} sqrt(T)`.
    pub fn coarse(grid: crate::grid::GridSpec, horizon: f64) -> Result<Self> {
        let n = grid.n();
        let stride = (n / 8).max(1);
        let mut centers = Vec::new();
        for z in (0..n).step_by(stride) {
            for y in (0..n).step_by(stride) {
                for x in (0..n).step_by(stride) {
                    centers.push([x, y, z]);
                }
            }
        }
        let sqrt_t = horizon.sqrt();
        let radii: Vec<f64> = (1..=6).map(|m| sqrt_t * (2.0f64).powi(-m)).collect();
        let scan = CarlesonScan { centers, radii };
        scan.validate(grid, horizon)?;
        Ok(scan)
    }

    pub fn validate(&self, grid: crate::grid::GridSpec, horizon: f64) -> Result<()> {
        assert!(self.radii.len() >= 3, "need at least 3 radii");
        let half = grid.box_len() / 2.0;
        for &r in &self.radii {
            if r > half {
                return Err(Error::BallWraps {
                    radius: r,
                    half_box: half,
                });
            }
            assert!(
                r <= horizon.sqrt() * (1.0 + 1e-12),
                "radius {r} exceeds sqrt(T)"
            );
        }
        Ok(())
    }
}

/// The two pieces of the `X_T` norm.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CarlesonReport {
    /// `sup_t t^{1/2} ||u(t)||_{L^inf}`.
    pub sup_term: f64,
    /// `sup_{x,R} R^{-3/2} ||u||_{L^2(B(x,R) x ]0,R^2[)}`.
    pub ball_term: f64,
    /// Their sum, the `X_T` norm.
    pub total: f64,
}

/// Integral of the trajectory-sampled scalar `g` over `[0, upper]`: constant
/// head on `[0, t_1]`, trapezoid between samples, linear tail to `upper`.
fn time_quadrature(times: &[f64], values: &[f64], upper: f64) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    if upper <= times[0] {
        return values[0] * upper;
    }
    let mut acc = values[0] * times[0];
    for i in 1..times.len() {
        if times[i] <= upper {
            acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        } else {
            let frac = (upper - times[i - 1]) / (times[i] - times[i - 1]);
            let v_at = values[i - 1] + frac * (values[i] - values[i - 1]);
            acc += 0.5 * (v_at + values[i - 1]) * (upper - times[i - 1]);
            return acc;
        }
    }
    // upper beyond the last sample: constant extension.
    acc + values[values.len() - 1] * (upper - times[times.len() - 1])
}

/// Koch-Tataru Carleson norm over the scan, via physical-space ball masking
/// and trajectory time quadrature.
pub fn carleson_norm(traj: &Trajectory, scan: &CarlesonScan) -> Result<CarlesonReport> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let grid = traj.grid();
    scan.validate(grid, traj.horizon())?;
    let n = grid.n();
    let h = grid.box_len() / n as f64;

    let mut sup_term = 0.0f64;
    for (i, &t) in traj.times().iter().enumerate() {
        sup_term = sup_term.max(t.sqrt() * ops::lp_norm(traj.field(i), f64::INFINITY)?);
    }

    // |u|^2 samples per time, reused across centers and radii.
    let energy: Vec<Vec<f64>> = traj
        .fields()
        .iter()
        .map(|f| {
            let phys = f.to_physical();
            let mut e = vec![0.0f64; grid.total_points()];
            for comp in &phys {
                for (acc, v) in e.iter_mut().zip(comp) {
                    *acc += v * v;
                }
            }
            e
        })
        .collect();

    let mut ball_term = 0.0f64;
    for &radius in &scan.radii {
        // Offsets of cells whose centers lie within the ball.
        let reach = (radius / h).ceil() as i64;
        let mut offsets = Vec::new();
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let d2 = (dx * dx + dy * dy + dz * dz) as f64 * h * h;
                    if d2 <= radius * radius {
                        offsets.push([dx, dy, dz]);
                    }
                }
            }
        }
        let t_upper = radius * radius;
        for center in &scan.centers {
            let per_time: Vec<f64> = energy
                .iter()
                .map(|e| {
                    let mut sum = 0.0f64;
                    for off in &offsets {
                        let x = (center[0] as i64 + off[0]).rem_euclid(n as i64) as usize;
                        let y = (center[1] as i64 + off[1]).rem_euclid(n as i64) as usize;
                        let z = (center[2] as i64 + off[2]).rem_euclid(n as i64) as usize;
                        sum += e[x + n * (y + n * z)];
                    }
                    sum * h * h * h
                })
                .collect();
            let spacetime = time_quadrature(traj.times(), &per_time, t_upper).max(0.0);
            ball_term = ball_term.max(spacetime.sqrt() / radius.powf(1.5));
        }
    }

    Ok(CarlesonReport {
        sup_term,
        ball_term,
        total: sup_term + ball_term,
    })
}

/// Result of one interpolation-inequality check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InterpReport {
    pub s: f64,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Verifies `||u||_{K^s_p} <= ||u||^theta_{K^{s1}_{p1}} ||u||^{1-theta}_{K^{s2}_{p2}}`
/// with `s = theta s1 + (1-theta) s2` and `1/p = theta/p1 + (1-theta)/p2`.
pub fn interp_check(
    traj: &Trajectory,
    idx1: KatoIndex,
    idx2: KatoIndex,
    theta: f64,
) -> Result<InterpReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::BadTheta(theta));
    }
    let inv_p = theta / idx1.p + (1.0 - theta) / idx2.p;
    if !inv_p.is_finite() || inv_p > 1.0 {
        return Err(Error::IndexArithmetic(format!(
            "1/p = {inv_p} outside [0, 1]"
        )));
    }
    let p = if inv_p == 0.0 { f64::INFINITY } else { 1.0 / inv_p };
    let s = theta * idx1.s + (1.0 - theta) * idx2.s;
    let lhs = kato_norm(traj, KatoIndex::new(s, p))?;
    let n1 = kato_norm(traj, idx1)?;
    let n2 = kato_norm(traj, idx2)?;
    let rhs = n1.powf(theta) * n2.powf(1.0 - theta);
    Ok(InterpReport {
        s,
        p,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-9),
    })
}

/// Serialized norm record for result emission.
#[derive(Debug, Clone, Serialize)]
pub struct NormRecord {
    pub norm_kind: String,
    pub indices: Vec<f64>,
    pub value: f64,
    pub grid: (usize, f64),
    pub time_grid: Vec<f64>,
}
