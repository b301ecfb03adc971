use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid rank: {0}")]
    InvalidRank(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),
    #[error("construction failure: {0}")]
    ConstructionFailure(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
