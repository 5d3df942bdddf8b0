use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("block structure mismatch: expected {expected:?}, found {found:?}")]
    BlockMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("value is not exactly representable over the Gaussian rationals: {0}")]
    NotExact(String),

    #[error("work cap exceeded: {needed} units requested, cap is {cap}")]
    WorkCapExceeded { needed: u128, cap: u64 },

    #[error("centralizer too atomic for requested sampling: {0}")]
    NoChain(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
