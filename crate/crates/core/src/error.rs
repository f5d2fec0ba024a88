use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("variance must be positive")]
    NonPositiveVariance,

    #[error("linearization undefined: triangle has a zero-length side")]
    LinearizationUndefined,

    #[error("all {0} Monte-Carlo samples were degenerate")]
    AllSamplesDegenerate(u64),

    #[error("joint distribution needs {entries} cells, cap is {cap}")]
    CapExceeded { entries: usize, cap: usize },

    #[error("{what} is not a probability distribution; offending rows: {rows:?}")]
    NotStochastic { what: String, rows: Vec<usize> },

    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
