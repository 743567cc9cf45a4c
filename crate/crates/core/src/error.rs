use thiserror::Error;

pub type Result<T> = std::result::Result<T, ReebError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReebError {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("evaluation failed at s={s}, x={x}, y={y}: {what}")]
    Evaluation { s: f64, x: f64, y: f64, what: String },

    #[error("integration failed at s={s}: {reason} (last state x={x}, y={y})")]
    Integration { s: f64, x: f64, y: f64, reason: String },

    #[error("degenerate rotation number {value}: within {tol:e} of an integer")]
    Degenerate { value: f64, tol: f64 },

    #[error("linearization is not elliptic (trace {trace}, eigenvalues {eig1}, {eig2})")]
    NonElliptic { trace: f64, eig1: f64, eig2: f64 },

    #[error("linking quadrature unreliable: {0}")]
    Resolution(String),

    #[error("linking integral {value} is inconclusive (distance to integer {confidence})")]
    Inconclusive { value: f64, confidence: f64 },

    #[error("construction failed: {0}")]
    Construction(String),
}

impl ReebError {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        ReebError::Precondition(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        ReebError::Configuration(msg.into())
    }
}
