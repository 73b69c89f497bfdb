use thiserror::Error;

/// Errors produced by the interpolation routines and their helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient resolution: {got} evaluation points for a support of size {needed}")]
    InsufficientResolution { needed: usize, got: usize },

    #[error("invalid spectral support: n_lo = {n_lo} > n_hi = {n_hi}")]
    InvalidSupport { n_lo: i64, n_hi: i64 },

    #[error("indivisible support: size {len} is not a multiple of {channels} channels")]
    IndivisibleSupport { len: usize, channels: usize },

    #[error("singular channel matrix at n = {n}")]
    SingularChannelMatrix { n: i64 },

    #[error("alpha = {alpha} outside the admissible interval {interval}")]
    AlphaOutOfRange { alpha: f64, interval: String },

    #[error("vanishing denominator at n = {n}")]
    VanishingDenominator { n: i64 },

    #[error("ill-conditioned grid: smallest circular gap {gap:e} below threshold {threshold:e}")]
    IllConditionedGrid { gap: f64, threshold: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frequency n = {n} lies inside the band")]
    InBand { n: i64 },

    #[error("insufficient tail decay: discarded mass ratio {ratio:e}")]
    InsufficientTailDecay { ratio: f64 },

    #[error("numerically singular system (condition estimate {cond:e})")]
    SingularSystem { cond: f64 },

    #[error("correlation undefined: image has zero variance")]
    ZeroVariance,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
