//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid distribution parameterization (bad moments, failed root-find).
    #[error("distribution: {0}")]
    Distribution(String),

    /// Requested Sobol dimension exceeds the shipped direction-number table.
    #[error("sobol dimension {requested} unsupported (table covers 1..={max})")]
    SobolDimension { requested: usize, max: usize },

    /// Expression parse failure, with 1-based line/column of the offending token.
    #[error("expression parse at {line}:{col}: {msg}")]
    ExprParse { line: usize, col: usize, msg: String },

    /// Expression references a variable not present in the evaluation scope.
    #[error("expression: unknown identifier `{0}`")]
    ExprUnknownIdentifier(String),

    /// Surrogate fitting failed (degenerate design, Cholesky breakdown after
    /// nugget escalation, too few points).
    #[error("surrogate fit: {0}")]
    Fit(String),

    /// Optimizer could not produce a usable iterate (non-finite objective at
    /// every start, empty bounds, dimension mismatch).
    #[error("optimizer: {0}")]
    Optimizer(String),

    /// Problem definition violates an invariant (bound inversion, bad target,
    /// DoE smaller than the minimum basis cap).
    #[error("problem definition: {0}")]
    Problem(String),

    /// A constraint classified inactive turned out unreliable at the optimum.
    /// Carries one line per violating constraint.
    #[error("inactive-constraint safety check failed: {0}")]
    InactiveConstraintViolation(String),

    /// Sample-table ingestion failure (column mismatch, malformed rows).
    #[error("ingest: {0}")]
    Ingest(String),

    /// Configuration file problems (unknown keys, missing fields).
    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// Serialized model does not round-trip (version mismatch, corrupt field).
    #[error("model serialization: {0}")]
    Serialization(String),
}
