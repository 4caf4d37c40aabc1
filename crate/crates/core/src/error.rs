use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid number `{0}`")]
    Parse(String),
    #[error("power series undefined: denominator vanishes at t = 0")]
    PoleAtOrigin,
    #[error("round-win probability must satisfy 0 < p < 1, got {0}")]
    Probability(String),
    #[error("exit capital must be at least 2, got {0}")]
    Goal(usize),
    #[error("{0}")]
    Domain(String),
    #[error("inadmissible strategy: {0}")]
    Strategy(String),
    #[error("singular system: zero pivot at row {0}")]
    Singular(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
