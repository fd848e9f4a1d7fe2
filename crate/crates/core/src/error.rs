use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("vector is not horizontal at the base point (|<w,z>| = {0:e})")]
    NonHorizontal(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("value outside the function domain: {0}")]
    Domain(String),
    #[error("tangent vectors are not linearly independent (smallest singular value {0:e})")]
    SingularTangent(f64),
    #[error("frame is not orthonormal (defect {0:e})")]
    NonOrthonormal(f64),
    #[error("matrix is not skew-symmetric (defect {0:e})")]
    NotSkew(f64),
    #[error("degenerate immersion: {0}")]
    DegenerateImmersion(String),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("dimensions (n={n}, q={q}) are not covered by any pinching case")]
    UnsupportedCase { n: usize, q: usize },
    #[error("initial data is not pinched (max margin {0:e})")]
    NotPinched(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("flow aborted: {0}")]
    FlowAborted(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
