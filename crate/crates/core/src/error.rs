use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown letter '{0}'")]
    UnknownLetter(String),
    #[error("empty image for letter '{0}'")]
    EmptyImage(String),
    #[error("lengths are not a left eigenvector for the expansion: {0}")]
    BadLengths(String),
    #[error("substitution matrix is not primitive")]
    NotPrimitive,
    #[error("seed {0} is not admissible: {1}")]
    BadSeed(String, String),
    #[error("window {requested} exceeds segment window {available}")]
    WindowExceeded { requested: f64, available: f64 },
    #[error("insufficient margin: {0}")]
    InsufficientMargin(String),
    #[error("index ({0},{1},{2}) is outside the rapidly expanding set")]
    IndexOutsideRange(usize, usize, usize),
    #[error("schedule too short: {0} scales, need at least 4")]
    ScheduleTooShort(usize),
    #[error("all magnitudes in the series tail are zero")]
    AllZeroTail,
    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,
    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),
    #[error("jordan structure detection failed: {0}")]
    JordanDetection(String),
    #[error("collar enumeration failed: {0}")]
    Collar(String),
    #[error("polynomial degree {0} exceeds cap {1}")]
    DegreeCap(usize, usize),
    #[error("operator spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
