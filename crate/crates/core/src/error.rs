//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by sequence analytics, enumeration, and certification.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its documented domain.
    InvalidArgument(String),
    /// A sequence violated positivity or monotonicity on the evaluated range.
    InvalidSequence(String),
    /// A sequence was evaluated past its largest representable index.
    OutOfRange { index: u64, limit: u64 },
    /// A model descriptor failed a construction invariant.
    InvalidModel(String),
    /// A cost table failed a construction invariant.
    InvalidCost(String),
    /// A certified constant could not be bracketed because its series diverges
    /// (or no convergent envelope is available).
    DivergentConstant(String),
    /// Enumeration exceeded the configured term budget.
    BudgetExceeded {
        epsilon: f64,
        retained: u64,
        visited: u64,
        budget: u64,
    },
    /// A brute-force scan detected that its coordinate or index caps clip the
    /// true set, so the scan is not a sound oracle.
    TruncationUnsound(String),
}

impl Error {
    /// Stable kebab-case name, used by front ends as a machine-readable tag.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidSequence(_) => "invalid-sequence",
            Error::OutOfRange { .. } => "out-of-range",
            Error::InvalidModel(_) => "invalid-model",
            Error::InvalidCost(_) => "invalid-cost",
            Error::DivergentConstant(_) => "divergent-constant",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::TruncationUnsound(_) => "truncation-unsound",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid-argument: {msg}"),
            Error::InvalidSequence(msg) => write!(f, "invalid-sequence: {msg}"),
            Error::OutOfRange { index, limit } => {
                write!(f, "out-of-range: index {index} beyond representable limit {limit}")
            }
            Error::InvalidModel(msg) => write!(f, "invalid-model: {msg}"),
            Error::InvalidCost(msg) => write!(f, "invalid-cost: {msg}"),
            Error::DivergentConstant(msg) => write!(f, "divergent-constant: {msg}"),
            Error::BudgetExceeded {
                epsilon,
                retained,
                visited,
                budget,
            } => write!(
                f,
                "budget-exceeded: eps={epsilon} retained={retained} visited={visited} budget={budget}"
            ),
            Error::TruncationUnsound(msg) => write!(f, "truncation-unsound: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
