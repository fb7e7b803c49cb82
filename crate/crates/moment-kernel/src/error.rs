//! Error type shared across the crate.

use crate::scalar::Rat;
use thiserror::Error;

/// Errors produced by moment sources, matrix assembly, factorizations,
/// eigensolves, and the diagnostics pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("multi-index {index:?} exceeds the degree bound {max_degree}")]
    DegreeOutOfRange { index: Vec<u32>, max_degree: u32 },

    #[error("coordinate {slot} out of range for dimension {d}")]
    SlotOutOfRange { slot: usize, d: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment s_0 must equal 1, got {got}")]
    NotNormalized { got: String },

    #[error("moment table: {0}")]
    Table(String),

    #[error("numeric parse error: {0:?}")]
    NumberParse(String),

    #[error("operation requires an exact-rational source ({0})")]
    RequiresExactMode(&'static str),

    /// The moment matrix is singular; the polynomial carried by
    /// `null_vector` (coefficients in graded-lex layout) has zero norm
    /// under the moment functional.
    #[error("degenerate moment matrix: null vector of size {}", null_vector.len())]
    Degenerate { null_vector: Vec<Rat> },

    #[error("matrix is not positive semidefinite (pivot {pivot} at step {step})")]
    NotPositiveSemidefinite { step: usize, pivot: String },

    #[error("eigensolver did not converge after {sweeps} sweeps at {bits} bits")]
    NoConvergence { sweeps: usize, bits: usize },

    #[error("precision ceiling {ceiling} bits reached while {context}")]
    PrecisionCeiling { ceiling: usize, context: String },

    #[error("trend classification needs max degree >= {min}, got {got}")]
    SequenceTooShort { got: u32, min: u32 },

    #[error("the condition suite requires a product source, got {0}")]
    NonProductSource(String),

    #[error("source spec invalid:\n{}", violations.join("\n"))]
    SourceSpec { violations: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
