use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("kernel singularity at z = 0")]
    Singular,

    #[error("coincident particles {i} and {j}")]
    Coincident { i: usize, j: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e} exceeds budget {budget:e}")]
    NumericalFailure { estimate: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
