use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the `acdc-core` library.
#[derive(Debug, Error)]
pub enum AcdcError {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed row at line {line}: expected {expected} fields, found {found}")]
    MalformedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("label column has {0} distinct values; exactly two are required")]
    LabelCardinality(usize),

    #[error("label value '{value}' cannot be mapped to 0/1: {reason}")]
    UnmappableLabel { value: String, reason: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("dataset has no labels")]
    Unlabeled,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("feature '{feature}' is {found}, expected {expected}")]
    KindMismatch {
        feature: String,
        expected: String,
        found: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("degenerate split: one side of the predicate is empty")]
    DegenerateSplit,

    #[error("no non-degenerate candidate split")]
    NoCandidates,

    #[error("carving equation has no solution at omega = {0} (balanced node)")]
    NoSolution(f64),

    #[error("bisection stalled at alpha = {alpha} with residual {residual:e}")]
    NotConverged { alpha: f64, residual: f64 },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("unsupported model format '{found}', expected '{expected}'")]
    ModelVersion { found: String, expected: String },

    #[error("malformed model document: {0}")]
    MalformedModel(String),
}

impl AcdcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AcdcError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, AcdcError>;
