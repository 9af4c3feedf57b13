use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy error: {what} (estimate {estimate:.3e}, budget {budget:.3e})")]
    Accuracy {
        what: String,
        estimate: f64,
        budget: f64,
    },

    #[error("grid too coarse for eigenvalue {index}: extrapolated {fine:.12e} vs {coarse:.12e}")]
    Resolution {
        index: usize,
        fine: f64,
        coarse: f64,
    },

    #[error("geometry inconsistency: {0}")]
    GeometryInconsistency(String),

    #[error("route disagreement: {what} differs by {difference:.3e} (allowed {allowed:.3e})")]
    RouteDisagreement {
        what: String,
        difference: f64,
        allowed: f64,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("unsupported topology: {0}")]
    Topology(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
