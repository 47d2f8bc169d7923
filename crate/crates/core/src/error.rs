use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs a power-of-two point count >= 16 and a positive half width (got n = {n_points}, L = {half_width})")]
    InvalidGrid { n_points: usize, half_width: f64 },

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multiplier is not Hermitian: imaginary residue {residue:e} exceeds {tolerance:e}")]
    NonHermitianSymbol { residue: f64, tolerance: f64 },

    #[error("Lebesgue exponent must satisfy p >= 1 (got {0})")]
    InvalidExponent(f64),

    #[error("invalid Besov parameters: {0}")]
    InvalidBesovParams(String),

    #[error("grid too coarse for a dyadic partition: largest block index {j_max} < 2")]
    PartitionTooCoarse { j_max: i32 },

    #[error("block index {j} outside [-2, {j_max}]")]
    BlockOutOfRange { j: i32, j_max: i32 },

    #[error("grid resolves only {points} lattice points in |k| <= 1/2; at least 8 are needed")]
    ProfileUnderResolved { points: usize },

    #[error("frequency index n = {n} invalid: {reason}")]
    InvalidIndex { n: u32, reason: String },

    #[error("non-finite state at t = {time}: solution blew up")]
    BlowUp { time: f64 },

    #[error("boundary tail {tail:e} exceeds the configured limit {limit:e} at t = {time}")]
    TailBreach { tail: f64, limit: f64, time: f64 },

    #[error("invalid solver request: {0}")]
    InvalidSolve(String),

    #[error("rate fit needs at least 3 points (got {0})")]
    TooFewPoints(usize),

    #[error("rate fit needs positive errors (got {value} at n = {n})")]
    NonPositiveError { n: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
