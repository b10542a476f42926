use thiserror::Error;

/// Errors raised by channel validation, decomposition, and bound evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("channel matrix is numerically zero")]
    ZeroMatrix,
    #[error("peak amplitude and average-to-peak ratio must be positive (A = {amplitude}, alpha = {alpha})")]
    NonPositivePower { amplitude: f64, alpha: f64 },
    #[error("noise covariance is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("channel has rank 0 after reduction")]
    DegenerateChannel,
    #[error("channel reduces to a square full-rank {0}x{0} matrix, which these bounds do not cover")]
    SquareFullRank(usize),
    #[error("channel is not in canonical form (need n_T > n_R = rank H)")]
    NotCanonical,
    #[error("no set of n_R linearly independent columns exists")]
    NoBasis,
    #[error("point lies outside the zonotope")]
    OutsideZonotope,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("argument {value} outside the open interval ({lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("target {target} outside the attainable range [{lo}, {hi}]")]
    Unreachable { target: f64, lo: f64, hi: f64 },
    #[error("empty optimization interval: alpha {alpha} is not below the threshold {alpha_th}")]
    EmptyInterval { alpha: f64, alpha_th: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
