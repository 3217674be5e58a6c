use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate x{coordinate} = {value} lies outside [{lo}, {hi}] for function `{function}`")]
    DomainViolation {
        function: String,
        coordinate: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid domain for dimension {dimension}: lower bound {lo} is not below upper bound {hi}")]
    InvalidDomain { dimension: usize, lo: f64, hi: f64 },

    #[error("a function named `{0}` is already registered")]
    DuplicateFunction(String),

    #[error("unknown function id {0}")]
    UnknownFunction(u32),

    #[error("unknown topology `{0}`")]
    UnknownTopology(String),

    #[error("malformed instance label `{0}` (expected f<ID>/<Topology>)")]
    BadLabel(String),

    #[error("dataset needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("train fraction {0} must lie strictly between 0 and 1")]
    BadTrainFraction(f64),

    #[error("training targets are constant ({0}); min-max scaling is undefined")]
    DegenerateScaling(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("function evaluation budget of {limit} exhausted")]
    BudgetExhausted { limit: usize },

    #[error("objective does not provide gradients")]
    NotDifferentiable,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty sample passed to a rank test")]
    EmptySample,

    #[error("exact Mann-Whitney enumeration is limited to {cap} combined observations, got {actual}")]
    ExactTooLarge { cap: usize, actual: usize },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("incomplete result store: {0}")]
    IncompleteStore(String),

    #[error("no checkpoint at fe {fe} for {cell}")]
    MissingCheckpoint { cell: String, fe: usize },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
