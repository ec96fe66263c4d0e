//! Coded distributed matrix multiplication over prime fields, with
//! information-theoretic privacy against colluding workers, plus a
//! shifted-exponential straggler simulator for comparing schemes under an
//! upload budget.

pub mod field;
pub mod gasp;
pub mod interp;
pub mod matrix;
pub mod naive;
pub mod privacy;
pub mod rateless;
pub mod sbp;
pub mod sim;

/// Crate-wide error type. Variants are part of the public contract: callers
/// and tests match on them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("zero has no multiplicative inverse")]
    InversionOfZero,
    #[error("degree {b} does not fit below field modulus {q}")]
    CoefficientOverflow { b: u64, q: u64 },
    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },
    #[error("cannot split evenly: {what}")]
    NonDivisible { what: String },
    #[error("singular interpolation system")]
    SingularMatrix,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expected {expected} items, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("derivative orders out of order: {0}")]
    NonPrefixOrders(String),
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("need {needed} results to decode, got {got}")]
    NotEnoughResults { needed: usize, got: usize },
    #[error("decode received {got} results but uses exactly {needed}")]
    TooManyResults { needed: usize, got: usize },
    #[error("decoding failed: {0}")]
    DecodingFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
