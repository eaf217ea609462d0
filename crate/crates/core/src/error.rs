//! Crate-wide error type.

use num_bigint::BigUint;
use std::fmt;

/// Errors produced by search-space construction, bandit bookkeeping,
/// numeric kernels and evaluators.
#[derive(Debug)]
pub enum Error {
    /// Invalid configuration (empty catalog, bad hyperparameter, ...).
    Config(String),
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// A requested entity (operation, candidate, utility entry) is missing.
    NotFound(String),
    /// An internal invariant would be broken by the requested mutation.
    Invariant(String),
    /// An arm was scored before the initialization sweep defined its stats.
    UndefinedArm(String),
    /// An operation was invoked at the wrong point of the round schedule.
    Schedule(String),
    /// Tensor shapes are incompatible.
    Shape(String),
    /// Attack generation failed (non-finite gradient, ...).
    Attack(String),
    /// An evaluator could not score a genotype.
    Evaluation(String),
    /// Checkpoint or serialized document failed validation.
    Checkpoint(String),
    /// Exhaustive enumeration refused: the space is too large.
    SpaceTooLarge { size: BigUint, limit: u64 },
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotFound(msg) => write!(f, "not found: {msg}"),
            Error::Invariant(msg) => write!(f, "invariant violation: {msg}"),
            Error::UndefinedArm(msg) => write!(f, "undefined arm: {msg}"),
            Error::Schedule(msg) => write!(f, "scheduling error: {msg}"),
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Attack(msg) => write!(f, "attack error: {msg}"),
            Error::Evaluation(msg) => write!(f, "evaluation error: {msg}"),
            Error::Checkpoint(msg) => write!(f, "checkpoint error: {msg}"),
            Error::SpaceTooLarge { size, limit } => {
                write!(f, "search space has {size} genotypes, enumeration limit is {limit}")
            }
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
