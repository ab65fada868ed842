use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group element: {0}")]
    InvalidElement(String),
    #[error("invalid base point: {0}")]
    InvalidBasePoint(String),
    #[error("cannot parse rational `{0}`")]
    ParseRational(String),
    #[error("element fixes the base point; angle is undefined")]
    Stabilizer,
    #[error("zero denominator for bottom row ({0}, {1})")]
    ZeroDenominator(String, String),
    #[error("capacity exceeded: projected {projected} elements, budget {budget}")]
    Capacity { projected: u64, budget: u64 },
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not hyperbolic (|trace| <= 2)")]
    NotHyperbolic,
    #[error("{0} is a perfect square")]
    SquareDiscriminant(u64),
    #[error("{0} is not a discriminant of a closed geodesic through rho")]
    NotInDrho(u64),
    #[error("search limit {0} reached")]
    SearchLimit(u64),
    #[error("spectral parameter outside the strip |Im t| <= 1/2")]
    OutsideStrip,
    #[error("elliptic factor {given} does not match stabilizer order {expected}")]
    EllipticMismatch { given: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
