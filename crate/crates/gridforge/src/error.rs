use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate lattice: {0}")]
    Degenerate(String),
    #[error("not a code: {0}")]
    NotACode(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("unsupported code dimension d = {0}")]
    UnsupportedDimension(u64),
    #[error("flow stalled after {steps} steps")]
    FlowStalled { steps: usize, last: Vec<f64> },
    #[error("classification failed: {0}")]
    Classification(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("decoder inconsistency: {0}")]
    DecoderInconsistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GridError>;
