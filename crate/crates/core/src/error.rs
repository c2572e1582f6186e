use thiserror::Error;

/// Errors raised by model construction, sampling, learning and file IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no edges; kappa is undefined")]
    EmptyGraph,

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("no graph on {p} nodes with maximum degree {degree}")]
    InfeasibleDegree { p: usize, degree: usize },

    #[error("l1 norm {norm} exceeds budget {budget}")]
    BudgetExceeded { norm: f64, budget: f64 },

    #[error("need at least {needed} samples (T + M), got {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed sample file at row {row}: {message}")]
    MalformedCsv { row: usize, message: String },

    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's input rather than an internal failure.
    pub fn is_bad_input(&self) -> bool {
        match self {
            Error::Io(_) | Error::Json(_) => false,
            Error::Trial { source, .. } => source.is_bad_input(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
