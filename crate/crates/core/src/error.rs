use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("the zero frequency is not a member of any frequency set")]
    ZeroMode,
    #[error("triad violates n = k + m: n={n}, k={k}, m={m}")]
    NotATriad { n: String, k: String, m: String },
    #[error("divergence violation at mode {mode}: |v·q_div| = {residual:e} exceeds tolerance")]
    DivergenceViolation { mode: String, residual: f64 },
    #[error("data misaligned with frequency set: {0}")]
    Misaligned(String),
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("time step {dt:e} exceeds oscillation bound {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("grid of {got} points per axis cannot resolve radius {radius} (need at least {need})")]
    GridTooCoarse {
        got: usize,
        need: usize,
        radius: u32,
    },
    #[error("{0}")]
    InvalidInput(String),
    #[error("empty shell: {0}")]
    EmptyShell(String),
    #[error("nonzero amplitude on horizontal-zero mode {0}")]
    HorizontalZeroMode(String),
    #[error("exact arithmetic overflow: {0}")]
    Overflow(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
