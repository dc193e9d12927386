use gridforge::GridError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported gaussian: {0}")]
    UnsupportedGaussian(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("truncation exceeded: {leak:.3e} of the population sits in the top Fock band")]
    Truncation { leak: f64 },
    #[error(transparent)]
    Lattice(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, FockError>;
