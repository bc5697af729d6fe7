use thiserror::Error;

use crate::path::Variant;

/// Errors raised by the solvers and the statistics built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LarsError {
    #[error("column appended at position {position} is numerically dependent on the active set")]
    DegenerateColumn { position: usize },

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cone projection retained no variables")]
    EmptyFace,

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("column `{0}` is constant")]
    ConstantColumn(String),

    #[error("expected {expected} columns, found {found}")]
    WrongColumnCount { expected: usize, found: usize },

    #[error("no inactive variable reaches the maximal correlation for a positive step")]
    NoPositiveCandidate,

    #[error("path exceeded the step guard of {0} steps")]
    MaxStepsExceeded(usize),

    #[error("two consecutive zero-length steps at step {step}")]
    StalledPath { step: usize },

    #[error("t = {t} is outside the path range [0, {t_max}]")]
    TOutOfRange { t: f64, t_max: f64 },

    #[error("iterative solver did not converge within {0} iterations")]
    MaxIterations(usize),

    #[error("full OLS fit needs n > m + 1 (n = {n}, m = {m})")]
    Underdetermined { n: usize, m: usize },

    #[error("the k-step degrees-of-freedom rule only applies to plain LARS paths, not {0}")]
    VariantMismatch(Variant),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, LarsError>;
