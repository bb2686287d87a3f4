use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported modulation order {0}")]
    UnsupportedOrder(usize),
    #[error("empty bit word")]
    EmptyWord,
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("degenerate source probability {0}")]
    DegenerateSource(f64),
    #[error("corrupted coded stream: {0}")]
    Corrupt(String),
    #[error("threshold search did not converge after {iterations} sweeps (best MI {best_mi})")]
    NoConvergence {
        iterations: usize,
        best_mi: f64,
        best: Vec<f64>,
    },
    #[error("contraction ratio {0} is not in (0, 1)")]
    InvalidAlpha(f64),
    #[error("transcript is not acknowledged")]
    NotAcknowledged,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
