//! Constructive splittings: horizontal (shell-index cut), diagonal
//! (per-shell amplitude threshold), their composition, the Besov-space
//! splitting with Sobolev recombination, the initial-data split and the
//! time-dyadic forcing split. Every operation returns a certificate pairing
//! measured norms with the predicted bounds.
//!
//! Two kinds of bounds appear. Sequence-space bounds carry explicit constants
//! (geometric sums, threshold level sets) and are asserted directly. Besov-
//! and trajectory-level bounds inherit an unspecified constant from the
//! co-retraction; their certificates record the implied constant
//! `measured / (N-power * source norm)` for stability auditing rather than
//! asserting a value.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::kato;
use crate::lp::{
    besov_norm, coretraction, retraction, s_crit, s_crit_forcing, BesovIndex, DyadicPartition,
    DyadicSequence,
};
use crate::ops;
use crate::trajectory::Trajectory;
use serde::Serialize;
use serde_json::json;

const EXPLICIT_SLACK: f64 = 1e-9;

/// One measured-versus-predicted line of a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub label: String,
    pub measured: f64,
    /// The bound evaluated with constant 1.
    pub reference: f64,
    /// `measured / reference`; for explicit bounds this must not exceed 1.
    pub ratio: f64,
    /// Explicit constants are asserted; fitted ones are only recorded.
    pub explicit: bool,
    pub pass: bool,
}

impl BoundCheck {
    fn explicit(label: &str, measured: f64, reference: f64) -> Self {
        let ratio = if reference > 0.0 {
            measured / reference
        } else if measured == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        BoundCheck {
            label: label.to_string(),
            measured,
            reference,
            ratio,
            explicit: true,
            pass: measured <= reference * (1.0 + EXPLICIT_SLACK) || measured == 0.0,
        }
    }

    fn fitted(label: &str, measured: f64, reference: f64) -> Self {
        let ratio = if reference > 0.0 {
            measured / reference
        } else {
            0.0
        };
        BoundCheck {
            label: label.to_string(),
            measured,
            reference,
            ratio,
            explicit: false,
            pass: true,
        }
    }
}

/// Split pieces with measured norms, predicted bounds and persistency checks.
#[derive(Debug, Clone, Serialize)]
pub struct SplitCertificate {
    pub lemma_id: String,
    pub params: serde_json::Value,
    pub bounds: Vec<BoundCheck>,
    /// Relative reconstruction defect of the pieces against the input.
    pub reconstruction_rel: f64,
    pub persistency_pass: bool,
    pub pass: bool,
}

impl SplitCertificate {
    fn finish(mut self) -> Self {
        self.pass = self.bounds.iter().all(|b| b.pass)
            && self.persistency_pass
            && self.reconstruction_rel <= 1e-10;
        self
    }
}

fn geometric_constant(delta: f64) -> f64 {
    // Horizontal-split constant 1/(1 - 2^{-|delta|}); the geometric tail
    // sums force the negative exponent.
    1.0 / (1.0 - (2.0f64).powf(-delta.abs()))
}

fn pow2(j: i32, e: f64) -> f64 {
    (2.0f64).powi(j).powf(e)
}

/// Shell-index cut at `kappa = floor(log2 K)`: trades regularity while
/// leaving every shell untouched.
pub fn horizontal_split(
    seq: &DyadicSequence,
    s: f64,
    s0: f64,
    s1: f64,
    k_level: f64,
    p: f64,
) -> Result<(DyadicSequence, DyadicSequence, SplitCertificate)> {
    if !(k_level > 0.0) {
        return Err(Error::BadLevel(k_level));
    }
    let between = (s0 < s && s < s1) || (s1 < s && s < s0);
    if !between {
        return Err(Error::NotBetween { s, s0, s1 });
    }
    let kappa = k_level.log2().floor() as i32;
    // `f` is the tail whose geometric sum converges in l^{s0}_1.
    let f_high = s0 < s;
    let mut f_pieces = Vec::with_capacity(seq.pieces.len());
    let mut g_pieces = Vec::with_capacity(seq.pieces.len());
    for (i, piece) in seq.pieces.iter().enumerate() {
        let j = seq.j_lo + i as i32;
        let zero = SpectralField::zeros(piece.grid(), piece.rank());
        let in_f = if f_high { j > kappa } else { j <= kappa };
        if in_f {
            f_pieces.push(piece.clone());
            g_pieces.push(zero);
        } else {
            f_pieces.push(zero);
            g_pieces.push(piece.clone());
        }
    }
    let f_seq = DyadicSequence {
        j_lo: seq.j_lo,
        pieces: f_pieces,
    };
    let g_seq = DyadicSequence {
        j_lo: seq.j_lo,
        pieces: g_pieces,
    };

    let source = seq.seq_norm(s, p, f64::INFINITY)?;
    let f_norm = f_seq.seq_norm(s0, p, 1.0)?;
    let g_norm = g_seq.seq_norm(s1, p, 1.0)?;
    let bounds = vec![
        BoundCheck::explicit(
            "|f|_{l^{s0}_1 L^p} <= K^{s0-s}/(1-2^{-|s0-s|}) |u|_{l^s_inf L^p}",
            f_norm,
            k_level.powf(s0 - s) * geometric_constant(s0 - s) * source,
        ),
        BoundCheck::explicit(
            "|g|_{l^{s1}_1 L^p} <= K^{s1-s}/(1-2^{-|s1-s|}) |u|_{l^s_inf L^p}",
            g_norm,
            k_level.powf(s1 - s) * geometric_constant(s1 - s) * source,
        ),
    ];
    // Pieces are coordinate restrictions, so persistency is sharp.
    let persistency_pass = f_seq.seq_norm(s, p, f64::INFINITY)? <= source
        && g_seq.seq_norm(s, p, f64::INFINITY)? <= source;
    let cert = SplitCertificate {
        lemma_id: "horizontal".into(),
        params: json!({"s": s, "s0": s0, "s1": s1, "K": k_level, "kappa": kappa, "p": p}),
        bounds,
        reconstruction_rel: 0.0,
        persistency_pass,
        pass: false,
    }
    .finish();
    Ok((f_seq, g_seq, cert))
}

/// Index triple for the diagonal (amplitude threshold) split with equal
/// summability on all three spaces, the only branch invoked downstream.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagonalParams {
    pub sigma: f64,
    pub s_tilde: f64,
    pub s_bar: f64,
    pub p: f64,
    pub p_tilde: f64,
    pub p_bar: f64,
    pub q: f64,
}

impl DiagonalParams {
    /// Residual of the colinearity of `(sigma, 1/p)` with the segment from
    /// `(s_tilde, 1/p_tilde)` to `(s_bar, 1/p_bar)`.
    pub fn colinearity_residual(&self) -> f64 {
        let theta = (1.0 / self.p - 1.0 / self.p_bar)
            / (1.0 / self.p_tilde - 1.0 / self.p_bar);
        (self.sigma - (theta * self.s_tilde + (1.0 - theta) * self.s_bar)).abs()
    }

    fn validate(&self) -> Result<()> {
        if !(self.p_tilde < self.p && self.p < self.p_bar) {
            return Err(Error::IndexArithmetic(format!(
                "need p_tilde < p < p_bar, got {} / {} / {}",
                self.p_tilde, self.p, self.p_bar
            )));
        }
        let residual = self.colinearity_residual();
        if residual > 1e-12 {
            return Err(Error::NotColinear(residual));
        }
        Ok(())
    }

    /// Per-shell threshold weight: `lambda_j^{1 - p/p_tilde} = 2^{j(sigma - s_tilde)}`.
    fn lambda(&self, j: i32) -> f64 {
        pow2(j, (self.sigma - self.s_tilde) / (1.0 - self.p / self.p_tilde))
    }
}

/// Per-shell amplitude thresholding at `tau_j = N lambda_j ||g_j||_{L^p}`:
/// trades integrability at fixed regularity line. Shells with vanishing
/// `L^p` norm pass entirely to the bounded piece.
pub fn diagonal_split(
    seq: &DyadicSequence,
    params: &DiagonalParams,
    n_level: f64,
) -> Result<(DyadicSequence, DyadicSequence, SplitCertificate)> {
    if !(n_level > 0.0) {
        return Err(Error::BadLevel(n_level));
    }
    params.validate()?;
    let mut tilde_pieces = Vec::with_capacity(seq.pieces.len());
    let mut bar_pieces = Vec::with_capacity(seq.pieces.len());
    let mut persistency_pass = true;
    let mut reconstruction_rel = 0.0f64;
    for (i, piece) in seq.pieces.iter().enumerate() {
        let j = seq.j_lo + i as i32;
        let lp = ops::lp_norm(piece, params.p)?;
        if lp == 0.0 {
            tilde_pieces.push(SpectralField::zeros(piece.grid(), piece.rank()));
            bar_pieces.push(piece.clone());
            continue;
        }
        let tau = n_level * params.lambda(j) * lp;
        let phys = piece.to_physical();
        let m = piece.grid().total_points();
        let mut modulus = vec![0.0f64; m];
        for comp in &phys {
            for (acc, v) in modulus.iter_mut().zip(comp) {
                *acc += v * v;
            }
        }
        let tau_sq = tau * tau;
        let masked: Vec<Vec<f64>> = phys
            .iter()
            .map(|comp| {
                comp.iter()
                    .zip(&modulus)
                    .map(|(&v, &m2)| if m2 > tau_sq { v } else { 0.0 })
                    .collect()
            })
            .collect();
        let tilde = SpectralField::from_physical(piece.grid(), piece.rank(), &masked)?;
        let bar = piece.sub(&tilde)?;
        let denom = ops::lp_norm(piece, params.p)?;
        let t_p = ops::lp_norm(&tilde, params.p)?;
        let b_p = ops::lp_norm(&bar, params.p)?;
        if t_p > denom * (1.0 + 1e-12) || b_p > denom * (1.0 + 1e-12) {
            persistency_pass = false;
        }
        let back = tilde.add(&bar)?;
        reconstruction_rel = reconstruction_rel.max(back.rel_coeff_distance(piece));
        tilde_pieces.push(tilde);
        bar_pieces.push(bar);
    }
    let tilde_seq = DyadicSequence {
        j_lo: seq.j_lo,
        pieces: tilde_pieces,
    };
    let bar_seq = DyadicSequence {
        j_lo: seq.j_lo,
        pieces: bar_pieces,
    };
    let source = seq.seq_norm(params.sigma, params.p, params.q)?;
    let tilde_norm = tilde_seq.seq_norm(params.s_tilde, params.p_tilde, params.q)?;
    let bar_norm = bar_seq.seq_norm(params.s_bar, params.p_bar, params.q)?;
    let bounds = vec![
        BoundCheck::explicit(
            "|g~|_{l^{s~}_q L^{p~}} <= N^{1-p/p~} |g|_{l^sigma_q L^p}",
            tilde_norm,
            n_level.powf(1.0 - params.p / params.p_tilde) * source,
        ),
        BoundCheck::explicit(
            "|g-|_{l^{s-}_q L^{p-}} <= N^{1-p/p-} |g|_{l^sigma_q L^p}",
            bar_norm,
            n_level.powf(1.0 - params.p / params.p_bar) * source,
        ),
    ];
    let cert = SplitCertificate {
        lemma_id: "diagonal".into(),
        params: json!({
            "sigma": params.sigma, "s_tilde": params.s_tilde, "s_bar": params.s_bar,
            "p": params.p, "p_tilde": params.p_tilde, "p_bar": params.p_bar,
            "q": params.q, "N": n_level,
        }),
        bounds,
        reconstruction_rel,
        persistency_pass,
        pass: false,
    }
    .finish();
    Ok((tilde_seq, bar_seq, cert))
}

/// Horizontal cut followed by a diagonal split of the remainder at
/// `sigma = s1`, all summabilities 1.
#[allow(clippy::too_many_arguments)]
pub fn nondiagonal_split(
    seq: &DyadicSequence,
    s: f64,
    s0: f64,
    s_tilde: f64,
    s_bar: f64,
    p: f64,
    p_tilde: f64,
    p_bar: f64,
    k_level: f64,
    n_level: f64,
) -> Result<(DyadicSequence, DyadicSequence, DyadicSequence, SplitCertificate)> {
    let s1 = segment_regularity_at(s_tilde, p_tilde, s_bar, p_bar, p);
    let (f_seq, g_seq, h_cert) = horizontal_split(seq, s, s0, s1, k_level, p)?;
    let diag = DiagonalParams {
        sigma: s1,
        s_tilde,
        s_bar,
        p,
        p_tilde,
        p_bar,
        q: 1.0,
    };
    let (tilde_seq, bar_seq, d_cert) = diagonal_split(&g_seq, &diag, n_level)?;

    let source = seq.seq_norm(s, p, f64::INFINITY)?;
    let horiz_factor = k_level.powf(s1 - s) * geometric_constant(s1 - s);
    let bounds = vec![
        h_cert.bounds[0].clone(),
        BoundCheck::explicit(
            "|g~|_{l^{s~}_1 L^{p~}} <= K^{s1-s}/(1-2^{-|s1-s|}) N^{1-p/p~} |u|",
            tilde_seq.seq_norm(s_tilde, p_tilde, 1.0)?,
            horiz_factor * n_level.powf(1.0 - p / p_tilde) * source,
        ),
        BoundCheck::explicit(
            "|g-|_{l^{s-}_1 L^{p-}} <= K^{s1-s}/(1-2^{-|s1-s|}) N^{1-p/p-} |u|",
            bar_seq.seq_norm(s_bar, p_bar, 1.0)?,
            horiz_factor * n_level.powf(1.0 - p / p_bar) * source,
        ),
    ];
    // Per-shell persistency against the source pieces.
    let mut persistency_pass = h_cert.persistency_pass && d_cert.persistency_pass;
    for (i, piece) in seq.pieces.iter().enumerate() {
        let denom = ops::lp_norm(piece, p)?;
        for part in [&f_seq, &tilde_seq, &bar_seq] {
            if ops::lp_norm(&part.pieces[i], p)? > denom * (1.0 + 1e-12) {
                persistency_pass = false;
            }
        }
    }
    let reconstruction_rel = d_cert.reconstruction_rel;
    let cert = SplitCertificate {
        lemma_id: "nondiagonal".into(),
        params: json!({
            "s": s, "s0": s0, "s1": s1, "s_tilde": s_tilde, "s_bar": s_bar,
            "p": p, "p_tilde": p_tilde, "p_bar": p_bar, "K": k_level, "N": n_level,
        }),
        bounds,
        reconstruction_rel,
        persistency_pass,
        pass: false,
    }
    .finish();
    Ok((f_seq, tilde_seq, bar_seq, cert))
}

/// Regularity of the point at integrability `p` on the segment from
/// `(s_a, 1/p_a)` to `(s_b, 1/p_b)`.
pub fn segment_regularity_at(s_a: f64, p_a: f64, s_b: f64, p_b: f64, p: f64) -> f64 {
    let theta = (1.0 / p - 1.0 / p_b) / (1.0 / p_a - 1.0 / p_b);
    theta * s_a + (1.0 - theta) * s_b
}

/// Index data of the Besov splitting.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovSplitParams {
    pub s: f64,
    pub p: f64,
    pub s_tilde: f64,
    pub p_tilde: f64,
    pub s_bar: f64,
    pub p_bar: f64,
}

/// Derived quantities of the Besov splitting pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovSplitDerived {
    pub s0: f64,
    pub s1: f64,
    pub k_exponent: f64,
    /// `N` exponent of the `B^{s~}_{p~,1}` piece.
    pub tilde_exponent: f64,
    /// `N` exponent of the `B^{s-}_{p-,1}` piece.
    pub bar_exponent: f64,
}

impl BesovSplitParams {
    /// Region check: `(s_bar, 1/p_bar)` must lie strictly inside the region
    /// bounded by the line through `(s, 1/p)` and `(s_tilde, 1/p_tilde)`, the
    /// line of slope `1/3` through `(s, 1/p)`, and the horizontal axis.
    pub fn validate(&self) -> Result<BesovSplitDerived> {
        let inv_p_bar = 1.0 / self.p_bar;
        if !(inv_p_bar > 0.0 && inv_p_bar < 1.0 / self.p) {
            return Err(Error::RegionCondition {
                s_bar: self.s_bar,
                inv_p_bar,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        // alpha: through (s, 1/p) and (s_tilde, 1/p_tilde); beta: slope 1/d.
        let alpha_at = self.s
            + (self.s_tilde - self.s) * (inv_p_bar - 1.0 / self.p)
                / (1.0 / self.p_tilde - 1.0 / self.p);
        let beta_at = self.s + 3.0 * (inv_p_bar - 1.0 / self.p);
        let (lo, hi) = if alpha_at < beta_at {
            (alpha_at, beta_at)
        } else {
            (beta_at, alpha_at)
        };
        if !(self.s_bar > lo && self.s_bar < hi) {
            return Err(Error::RegionCondition {
                s_bar: self.s_bar,
                inv_p_bar,
                lo,
                hi,
            });
        }
        let s1 = segment_regularity_at(self.s_tilde, self.p_tilde, self.s_bar, self.p_bar, self.p);
        let s0 = self.s_bar + 3.0 / self.p - 3.0 / self.p_bar;
        let k_exponent = (1.0 - self.p / self.p_bar) / (s0 - s1);
        let tilde_exponent =
            (s1 - self.s) / (s0 - s1) * (1.0 - self.p / self.p_bar) + (1.0 - self.p / self.p_tilde);
        let bar_exponent = (s0 - self.s) / (s0 - s1) * (1.0 - self.p / self.p_bar);
        Ok(BesovSplitDerived {
            s0,
            s1,
            k_exponent,
            tilde_exponent,
            bar_exponent,
        })
    }
}

/// Besov-space splitting: retraction, non-diagonal sequence split with
/// `K = N^{(1-p/p_bar)/(s0-s1)}`, co-retraction, and the Sobolev
/// recombination `u_bar = S(f) + S(g_bar)`.
pub fn besov_split(
    partition: &DyadicPartition,
    u: &SpectralField,
    params: &BesovSplitParams,
    n_level: f64,
) -> Result<(SpectralField, SpectralField, SplitCertificate)> {
    if !(n_level > 0.0) {
        return Err(Error::BadLevel(n_level));
    }
    let derived = params.validate()?;
    let k_level = n_level.powf(derived.k_exponent);
    let seq = retraction(partition, u)?;
    let (f_seq, tilde_seq, bar_seq, seq_cert) = nondiagonal_split(
        &seq,
        params.s,
        derived.s0,
        params.s_tilde,
        params.s_bar,
        params.p,
        params.p_tilde,
        params.p_bar,
        k_level,
        n_level,
    )?;
    let u_tilde = coretraction(partition, &tilde_seq)?;
    let u_bar = coretraction(partition, &f_seq.add(&bar_seq)?)?;

    let source = besov_norm(partition, u, &BesovIndex::new(params.s, params.p, f64::INFINITY))?.0;
    let tilde_norm = besov_norm(
        partition,
        &u_tilde,
        &BesovIndex::new(params.s_tilde, params.p_tilde, 1.0),
    )?
    .0;
    let bar_norm = besov_norm(
        partition,
        &u_bar,
        &BesovIndex::new(params.s_bar, params.p_bar, 1.0),
    )?
    .0;
    let tilde_pers = besov_norm(
        partition,
        &u_tilde,
        &BesovIndex::new(params.s, params.p, f64::INFINITY),
    )?
    .0;
    let bar_pers = besov_norm(
        partition,
        &u_bar,
        &BesovIndex::new(params.s, params.p, f64::INFINITY),
    )?
    .0;

    let back = u_tilde.add(&u_bar)?;
    let diff = back.sub(u)?;
    let reconstruction_rel =
        diff.plancherel_l2_sq().sqrt() / u.plancherel_l2_sq().sqrt().max(1e-300);

    let mut bounds = seq_cert.bounds.clone();
    bounds.push(BoundCheck::fitted(
        "|u~|_{B^{s~}_{p~,1}} <= C N^{e~} |u|_{B^s_{p,inf}}",
        tilde_norm,
        n_level.powf(derived.tilde_exponent) * source,
    ));
    bounds.push(BoundCheck::fitted(
        "|u-|_{B^{s-}_{p-,1}} <= C N^{e-} |u|_{B^s_{p,inf}}",
        bar_norm,
        n_level.powf(derived.bar_exponent) * source,
    ));
    bounds.push(BoundCheck::fitted(
        "persistency |u~|_{B^s_{p,inf}} <= C |u|",
        tilde_pers,
        source,
    ));
    bounds.push(BoundCheck::fitted(
        "persistency |u-|_{B^s_{p,inf}} <= C |u|",
        bar_pers,
        source,
    ));
    let cert = SplitCertificate {
        lemma_id: "besov_split".into(),
        params: json!({
            "params": params, "derived": derived, "N": n_level, "K": k_level,
        }),
        bounds,
        reconstruction_rel,
        persistency_pass: seq_cert.persistency_pass,
        pass: false,
    }
    .finish();
    Ok((u_tilde, u_bar, cert))
}

/// Exponents of the initial-data split at integrability `p` (`d = 3`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InitialSplitParams {
    pub p: f64,
    pub s: f64,
    pub p_bar: f64,
    pub s_dot: f64,
    pub s_bar: f64,
    pub s0: f64,
    pub s1: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub delta2: f64,
}

/// Parameter choices of the construction: `p~ = 2`, `s~ = 0`, `p- = 2p`,
/// `s- = (s_{2p} + s.)/2` with `s.` on the line through `(s_p, 1/p)` and
/// `(0, 1/2)` at height `1/(2p)`.
pub fn initial_split_params(p: f64) -> Result<InitialSplitParams> {
    if p <= 3.0 {
        return Err(Error::IntegrabilityTooLow(p));
    }
    let s = s_crit(p);
    let p_bar = 2.0 * p;
    let s_dot = (1.0 / (2.0 * p) - 0.5) / (1.0 / p - 0.5) * s;
    let s_bar = 0.5 * (s_crit(p_bar) + s_dot);
    let delta2 = s_bar - s_crit(p_bar);
    let besov = BesovSplitParams {
        s,
        p,
        s_tilde: 0.0,
        p_tilde: 2.0,
        s_bar,
        p_bar,
    };
    let derived = besov.validate()?;
    Ok(InitialSplitParams {
        p,
        s,
        p_bar,
        s_dot,
        s_bar,
        s0: derived.s0,
        s1: derived.s1,
        gamma1: derived.bar_exponent,
        gamma2: -derived.tilde_exponent,
        delta2,
    })
}

/// Split divergence-free initial data into a finite-energy piece and a
/// subcritical piece, both re-projected onto divergence-free fields.
pub fn split_initial_data(
    partition: &DyadicPartition,
    u0: &SpectralField,
    p: f64,
    n_level: f64,
) -> Result<(SpectralField, SpectralField, SplitCertificate)> {
    let defect = u0.divergence_defect();
    if defect > 1e-10 {
        return Err(Error::NotDivergenceFree(defect));
    }
    let params = initial_split_params(p)?;
    let besov = BesovSplitParams {
        s: params.s,
        p,
        s_tilde: 0.0,
        p_tilde: 2.0,
        s_bar: params.s_bar,
        p_bar: params.p_bar,
    };
    let (raw_tilde, raw_bar, inner) = besov_split(partition, u0, &besov, n_level)?;
    let u_tilde = ops::leray_project(&raw_tilde)?;
    let u_bar = ops::leray_project(&raw_bar)?;

    let source = besov_norm(partition, u0, &BesovIndex::critical(p))?.0;
    let l2_tilde = ops::lp_norm(&u_tilde, 2.0)?;
    let bar_subcrit = besov_norm(
        partition,
        &u_bar,
        &BesovIndex::new(params.s_bar, params.p_bar, params.p_bar),
    )?
    .0;
    let tilde_pers = besov_norm(partition, &u_tilde, &BesovIndex::critical(p))?.0;
    let bar_pers = besov_norm(partition, &u_bar, &BesovIndex::critical(p))?.0;

    let back = u_tilde.add(&u_bar)?;
    let diff = back.sub(u0)?;
    let reconstruction_rel =
        diff.plancherel_l2_sq().sqrt() / u0.plancherel_l2_sq().sqrt().max(1e-300);

    let bounds = vec![
        BoundCheck::fitted(
            "|u0~|_{L^2} <= C N^{-gamma2} |u0|_{B^{s_p}_{p,inf}}",
            l2_tilde,
            n_level.powf(-params.gamma2) * source,
        ),
        BoundCheck::fitted(
            "|u0-|_{B^{s_{2p}+delta2}_{2p,2p}} <= C N^{gamma1} |u0|",
            bar_subcrit,
            n_level.powf(params.gamma1) * source,
        ),
        BoundCheck::fitted("persistency |u0~|_{B^{s_p}_{p,inf}} <= C |u0|", tilde_pers, source),
        BoundCheck::fitted("persistency |u0-|_{B^{s_p}_{p,inf}} <= C |u0|", bar_pers, source),
        BoundCheck::explicit("div-free u0~", u_tilde.divergence_defect(), 1e-10),
        BoundCheck::explicit("div-free u0-", u_bar.divergence_defect(), 1e-10),
    ];
    let cert = SplitCertificate {
        lemma_id: "initial_data".into(),
        params: json!({"lemma18": params, "N": n_level, "inner": inner.params}),
        bounds,
        reconstruction_rel,
        persistency_pass: inner.persistency_pass,
        pass: false,
    }
    .finish();
    Ok((u_tilde, u_bar, cert))
}

/// Derived indices of the forcing split.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ForcingSplitParams {
    pub p: f64,
    pub sigma: f64,
    pub s_tilde: f64,
    pub s_bar: f64,
    pub p3: f64,
    pub delta3: f64,
}

/// Parameters of the time-dyadic forcing split: `sigma = s_p'`,
/// `s~ = -7/12`, `p~ = 2`, `p- = 2p`, with `s-` on the line through
/// `(sigma, 1/p)` and `(s~, 1/2)` at height `1/(2p)`.
pub fn forcing_split_params(p: f64) -> Result<ForcingSplitParams> {
    if p <= 3.0 {
        return Err(Error::IntegrabilityTooLow(p));
    }
    let sigma = s_crit_forcing(p);
    let s_tilde = -7.0 / 12.0;
    let p3 = 2.0 * p;
    let s_bar = sigma + (s_tilde - sigma) * (1.0 / p3 - 1.0 / p) / (0.5 - 1.0 / p);
    let delta3 = s_bar - s_crit_forcing(p3);
    assert!(delta3 > 0.0, "slope must stay below the critical line");
    Ok(ForcingSplitParams {
        p,
        sigma,
        s_tilde,
        s_bar,
        p3,
        delta3,
    })
}

/// Dyadic time block of a sample: `j <= 0` with `t in ]T 2^{j-1}, T 2^j]`.
fn block_of(t: f64, horizon: f64) -> i32 {
    ((t / horizon).log2() - 1e-12).ceil() as i32
}

/// Time-dyadic amplitude-threshold split of a forcing trajectory. Each block
/// `]T 2^{j-1}, T 2^j]` is thresholded at `tau_j = N lambda_j B_j` where
/// `B_j` is the block's `L^inf_t L^p_x` norm over the samples and
/// `lambda_j^{1-p/2} = 2^{j(s~-sigma)/2}`.
pub fn split_forcing(
    forcing: &Trajectory,
    p: f64,
    n_level: f64,
    horizon: f64,
) -> Result<(Trajectory, Trajectory, SplitCertificate)> {
    if !(n_level > 0.0) {
        return Err(Error::BadLevel(n_level));
    }
    if forcing.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: forcing.rank(),
        });
    }
    let params = forcing_split_params(p)?;
    let blocks: Vec<i32> = forcing
        .times()
        .iter()
        .map(|&t| block_of(t, horizon))
        .collect();
    let j_lo = *blocks.iter().min().unwrap();
    if *blocks.iter().max().unwrap() > 0 {
        return Err(Error::BeyondHorizon {
            t: *forcing.times().last().unwrap(),
            horizon,
        });
    }
    // Every block between the deepest and 0 must hold a sample.
    for j in j_lo..=0 {
        if !blocks.contains(&j) {
            return Err(Error::BlockGridIncompatible { j, j_lo });
        }
    }
    // Block norms: L^inf_t L^p_x over the samples of the block.
    let mut block_norm = std::collections::BTreeMap::new();
    for (i, &j) in blocks.iter().enumerate() {
        let v = ops::lp_norm(forcing.field(i), p)?;
        let slot = block_norm.entry(j).or_insert(0.0f64);
        *slot = slot.max(v);
    }
    let lambda = |j: i32| pow2(j, (params.s_tilde - params.sigma) / (2.0 * (1.0 - p / 2.0)));

    let mut tilde_fields = Vec::with_capacity(forcing.len());
    let mut bar_fields = Vec::with_capacity(forcing.len());
    let mut persistency_pass = true;
    let mut reconstruction_rel = 0.0f64;
    for (i, &j) in blocks.iter().enumerate() {
        let field = forcing.field(i);
        let b_j = block_norm[&j];
        if b_j == 0.0 {
            tilde_fields.push(SpectralField::zeros(field.grid(), 2));
            bar_fields.push(field.clone());
            continue;
        }
        let tau = n_level * lambda(j) * b_j;
        let phys = field.to_physical();
        let m = field.grid().total_points();
        let mut modulus = vec![0.0f64; m];
        for comp in &phys {
            for (acc, v) in modulus.iter_mut().zip(comp) {
                *acc += v * v;
            }
        }
        let tau_sq = tau * tau;
        let masked: Vec<Vec<f64>> = phys
            .iter()
            .map(|comp| {
                comp.iter()
                    .zip(&modulus)
                    .map(|(&v, &m2)| if m2 > tau_sq { v } else { 0.0 })
                    .collect()
            })
            .collect();
        let tilde = SpectralField::from_physical(field.grid(), 2, &masked)?;
        let bar = field.sub(&tilde)?;
        let f_p = ops::lp_norm(field, p)?;
        if ops::lp_norm(&tilde, p)? > f_p * (1.0 + 1e-12)
            || ops::lp_norm(&bar, p)? > f_p * (1.0 + 1e-12)
        {
            persistency_pass = false;
        }
        reconstruction_rel = reconstruction_rel.max(tilde.add(&bar)?.rel_coeff_distance(field));
        tilde_fields.push(tilde);
        bar_fields.push(bar);
    }
    let times = forcing.times().to_vec();
    let f_tilde = Trajectory::new(times.clone(), tilde_fields, forcing.horizon())?;
    let f_bar = Trajectory::new(times, bar_fields, forcing.horizon())?;

    let source = kato::fspace_norm(forcing, p)?;
    let l3l2 = l3t_l2x_norm(&f_tilde);
    let bar_target = kato::fspace_norm_at(&f_bar, s_crit_forcing(params.p3) + params.delta3, params.p3)?;
    let tilde_pers = kato::fspace_norm(&f_tilde, p)?;
    let bar_pers = kato::fspace_norm(&f_bar, p)?;
    let bounds = vec![
        BoundCheck::fitted(
            "|F~|_{L^3_t L^2_x} <= C T^{-1/12} N^{1-p/2} |F|_{F_p}",
            l3l2,
            horizon.powf(-1.0 / 12.0) * n_level.powf(1.0 - p / 2.0) * source,
        ),
        BoundCheck::fitted(
            "|F-|_{F^{s'_{p3}+delta3}_{p3}} <= C T^{delta3/2} N^{1/2} |F|_{F_p}",
            bar_target,
            horizon.powf(params.delta3 / 2.0) * n_level.sqrt() * source,
        ),
        BoundCheck::explicit("persistency |F~|_{F_p} <= |F|_{F_p}", tilde_pers, source),
        BoundCheck::explicit("persistency |F-|_{F_p} <= |F|_{F_p}", bar_pers, source),
    ];
    let cert = SplitCertificate {
        lemma_id: "forcing".into(),
        params: json!({"forcing": params, "N": n_level, "T": horizon, "j_lo": j_lo}),
        bounds,
        reconstruction_rel,
        persistency_pass,
        pass: false,
    }
    .finish();
    Ok((f_tilde, f_bar, cert))
}

/// `(int_0^T ||F(t)||_{L^2}^3 dt)^{1/3}` by trajectory quadrature.
pub fn l3t_l2x_norm(traj: &Trajectory) -> f64 {
    let values: Vec<f64> = traj
        .fields()
        .iter()
        .map(|f| f.plancherel_l2_sq().sqrt().powi(3))
        .collect();
    let times = traj.times();
    let mut acc = values[0] * times[0];
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc.powf(1.0 / 3.0)
}
