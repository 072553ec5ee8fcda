use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("modulus {0:?} is reducible over the prime field")]
    ReducibleModulus(Vec<u32>),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("incompatible fields: {0}")]
    IncompatibleFields(String),
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("expected a vector of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("element {0} is out of range for the field")]
    ElementOutOfRange(u32),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("point is not affine (it lies on the hyperplane at infinity)")]
    NotAffine,
    #[error("point does not lie on the hyperplane at infinity")]
    NotAtInfinity,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("frame invariant violated: {0}")]
    Frame(String),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error("theorem check failed: {0}")]
    Violation(String),
    #[error("coverage array does not belong to this point set")]
    StaleCoverage,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
