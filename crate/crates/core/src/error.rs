use thiserror::Error;

/// Errors raised by constructors and checked evaluations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("direction must be a nonzero vector")]
    ZeroDirection,

    #[error("positivity violated: |bias| + strength = {sum} > 1")]
    Positivity { sum: f64 },

    #[error("strength {0} outside [0, 1]")]
    StrengthRange(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("density matrix trace {0} is not 1")]
    BadTrace(f64),

    #[error("state components out of range: {0}")]
    StateRange(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
