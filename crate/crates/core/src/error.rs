use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Hilbert space dimension {dim} exceeds the supported maximum of {max}")]
    Capacity { dim: usize, max: usize },

    #[error("no solution: {0}")]
    NoSolution(String),

    /// A forward model was evaluated outside the region where it is defined.
    #[error("model domain error: {0}")]
    ModelDomain(String),

    #[error("no avoided crossing inside the field span [{lo} T, {hi} T]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ModelDomain(msg.into())
    }
}
