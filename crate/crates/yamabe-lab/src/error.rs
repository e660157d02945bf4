use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("radius {radius} is outside the grid [{lo}, {hi}]")]
    OutOfDomain { radius: f64, lo: f64, hi: f64 },
    #[error("quadrature did not converge: achieved relative error {achieved:e} after {nodes} nodes")]
    Quadrature { achieved: f64, nodes: usize },
    #[error("singular linear system at row {0}")]
    Singular(usize),
    #[error("internal consistency check failed: {what} (lhs {lhs:e}, rhs {rhs:e})")]
    Consistency { what: String, lhs: f64, rhs: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn precondition(msg: impl Into<String>) -> LabError {
    LabError::Precondition(msg.into())
}
