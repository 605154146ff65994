use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix argument is not symmetric (|X - X^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid too coarse: h = {h} but the smallest resolvable feature needs h < {max_h}")]
    GridTooCoarse { h: f64, max_h: f64 },

    #[error("pointwise solve infeasible at node {node} (x = {x:?})")]
    PointwiseInfeasible { node: usize, x: Vec<f64> },

    #[error("scheme is not monotone: {0}")]
    NonMonotone(String),

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { iterations: usize, what: String },

    #[error("certificate is not positive at {x:?} (phi = {value})")]
    NonPositiveCertificate { x: Vec<f64>, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
