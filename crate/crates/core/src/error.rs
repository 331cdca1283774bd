use thiserror::Error;

use crate::duhamel::DuhamelReport;

pub type Result<T, E = FlowError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular metric at node (ix={ix}, iy={iy}, x={x:.6e}, y={y:.6}): {detail}")]
    SingularMetric {
        ix: usize,
        iy: usize,
        x: f64,
        y: f64,
        detail: String,
    },

    #[error("positivity lost at t={t:.6}: smallest eigenvalue {min_eig:.3e} at node (ix={ix}, iy={iy})")]
    PositivityLost {
        t: f64,
        ix: usize,
        iy: usize,
        min_eig: f64,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("flow step failed at t={t:.6}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<FlowError>,
    },

    #[error("Picard iteration is not contracting (kappa_hat = {kappa:.4})")]
    Divergence {
        kappa: f64,
        report: Box<DuhamelReport>,
    },

    #[error("inverse iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("decay fit rejected: {0}")]
    FitRejected(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl FlowError {
    pub fn config(msg: impl Into<String>) -> Self {
        FlowError::Config(msg.into())
    }
}
