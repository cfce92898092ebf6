use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid rectangle: lower bound exceeds upper bound at coordinate {0}")]
    InvalidRectangle(usize),
    #[error("truncation region has zero probability")]
    ZeroProbability,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("row {row}: {msg}")]
    DegenerateRow { row: usize, msg: String },
    #[error("component {component} collapsed (effective size {size:.3})")]
    ComponentCollapse { component: usize, size: f64 },
    #[error("k-means produced an empty cluster after {0} restarts")]
    EmptyCluster(usize),
    #[error("rejection sampler accepted no draws")]
    NoAcceptedDraws,
    #[error("{failed} of {total} replicates failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: String, msg: String },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the input files rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Format(_) | Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
