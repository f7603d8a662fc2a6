use thiserror::Error;

use crate::solvers::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    /// A first-index fiber (a column of the flattening) does not sum to one.
    #[error("column index {column} sums to {sum} (expected 1 within {tolerance:e})")]
    Stochasticity { column: usize, sum: f64, tolerance: f64 },

    #[error("negative entry {value} at row {row}, column {column}")]
    NegativeEntry { row: usize, column: usize, value: f64 },

    #[error("teleportation vector is not stochastic: {0}")]
    InvalidTeleportation(String),

    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("PRNG state must be nonzero")]
    ZeroState,

    #[error("alpha must lie in [0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("denominator 1 - 2*alpha*sum vanishes (alpha = {alpha}, sum = {sum})")]
    SingularDenominator { alpha: f64, sum: f64 },

    #[error("matrix is numerically singular: pivot {pivot:e} at step {step} below threshold {threshold:e}")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },

    #[error("solver did not converge: NRes {:e} after {} steps ({} factorizations)", .0.nres_final, .0.total_inner_steps, .0.factorizations)]
    NotConverged(Box<SolveReport>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
