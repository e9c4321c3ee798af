use thiserror::Error;

/// Errors raised by the emulator, comparison primitives and harness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not invertible modulo {1}")]
    NotInvertible(u64, u64),
    #[error("invalid modulus {0}: expected an odd prime")]
    InvalidModulus(u64),
    #[error("ring mismatch: ({0}, {1}) vs ({2}, {3})")]
    MismatchedRing(u64, usize, u64, usize),
    #[error("exponent {exponent} out of range for degree bound {n}")]
    ExponentOutOfRange { exponent: i64, n: usize },
    #[error("operands belong to different contexts or moduli: {0}")]
    ContextMismatch(String),
    #[error("depth budget exhausted: need {needed} levels, budget is {budget}")]
    DepthExceeded { needed: u32, budget: u32 },
    #[error("bit width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("operation requires the {expected} profile, context runs {actual}")]
    ProfileMismatch { expected: &'static str, actual: &'static str },
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("value {value} outside the ring domain [0, {n})")]
    DomainTooLarge { value: u64, n: usize },
    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),
    #[error("scenario mismatch: {0} vs {1}")]
    ScenarioMismatch(String, String),
    #[error("unknown report format: {0}")]
    UnknownFormat(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
