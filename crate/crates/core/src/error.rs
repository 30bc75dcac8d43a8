use thiserror::Error;

/// Errors produced by model construction, fitting and metric evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlsigError {
    #[error("invalid partition {index}: {reason}")]
    InvalidPartition { index: usize, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("series too short: need at least {required} points, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("non-finite value in input data")]
    NonFiniteData,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: observed values have zero variance")]
    DegenerateData,

    #[error("partition {0} has a zero output range")]
    DegeneratePartition(usize),

    #[error("pipelines are not homogeneous: {0}")]
    HeterogeneousPipelines(String),

    #[error("bootstrap aborted: {failed} of {total} replicate fits failed")]
    BootstrapFailure { failed: usize, total: usize },
}

pub type Result<T, E = NlsigError> = std::result::Result<T, E>;
