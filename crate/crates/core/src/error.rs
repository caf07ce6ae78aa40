use thiserror::Error;

/// Errors surfaced by the norm calculus, the solver layer and the splitters.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid must have n >= 8 points per axis and n a power of two, got {0}")]
    BadGrid(usize),
    #[error("box length must be positive, got {0}")]
    BadBoxLen(f64),
    #[error("lp_norm requires real-valued field")]
    NotRealValued,
    #[error("operation requires a rank-{expected} field, got rank {got}")]
    RankMismatch { expected: u8, got: u8 },
    #[error("operation requires a divergence-free field (defect {0:.3e})")]
    NotDivergenceFree(f64),
    #[error("heat time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("trajectories must share the same time grid")]
    TimeGridMismatch,
    #[error("shell index {j} outside resolvable range {j_min}..={j_max}")]
    ShellOutOfRange { j: i32, j_min: i32, j_max: i32 },
    #[error("heat characterization requires negative regularity, got s = {0}")]
    NonNegativeRegularity(f64),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("requested time {t} beyond trajectory horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("interpolation parameter must satisfy 0 < theta < 1, got {0}")]
    BadTheta(f64),
    #[error("incompatible index arithmetic: {0}")]
    IndexArithmetic(String),
    #[error("ball radius {radius} exceeds half the box length {half_box} (ball wraps)")]
    BallWraps { radius: f64, half_box: f64 },
    #[error("regularity {s} must lie strictly between {s0} and {s1}")]
    NotBetween { s: f64, s0: f64, s1: f64 },
    #[error("index points are not colinear (residual {0:.3e})")]
    NotColinear(f64),
    #[error(
        "target point (s = {s_bar}, 1/p = {inv_p_bar}) outside the admissible region: \
         at that height the region spans s in ({lo}, {hi})"
    )]
    RegionCondition {
        s_bar: f64,
        inv_p_bar: f64,
        lo: f64,
        hi: f64,
    },
    #[error("integrability must satisfy p > 3 for this construction, got {0}")]
    IntegrabilityTooLow(f64),
    #[error("time grid leaves dyadic block {j} (in {j_lo}..=0) without samples")]
    BlockGridIncompatible { j: i32, j_lo: i32 },
    #[error("fixed point did not converge within {max_iter} iterations; increments {history:?}")]
    NonConvergence { max_iter: usize, history: Vec<f64> },
    #[error("splitting level must be positive, got {0}")]
    BadLevel(f64),
    #[error("empty sweep list")]
    EmptySweep,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
