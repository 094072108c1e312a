use thiserror::Error;

/// Errors raised by the library. Divergence is never an error: it is
/// reported through the `+inf` value of the scalar type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent {0} is below 1")]
    ExponentBelowOne(f64),
    #[error("exponent {0} has no finite conjugate under the current convention")]
    InvalidConjugate(f64),
    #[error("function has {got} samples but the space has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid measure space: {0}")]
    InvalidSpace(String),
    #[error("parameter domain violated: {0}")]
    Domain(String),
    #[error("point {p} lies outside the open interval ({a}, {b})")]
    OutsideInterval { p: f64, a: f64, b: f64 },
    #[error("Young-Fenchel transform is unbounded (supremum escapes to z = {0})")]
    UnboundedTransform(f64),
    #[error("relation undefined: {0}")]
    Undefined(String),
    #[error("test not applicable: {0}")]
    NotApplicable(String),
    #[error("sets of a simple function overlap: {0}")]
    Overlap(String),
    #[error("empty majorant family")]
    EmptyFamily,
    #[error("no interior maximizer: {0}")]
    NoInteriorMaximizer(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
