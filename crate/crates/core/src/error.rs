use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not symmetric: |A[{row}][{col}] - A[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("eigenvalues outside the Garding cone: sigma_{index} = {sigma:e} <= 0")]
    ConeViolation { index: usize, sigma: f64 },

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("degenerate surface at node {node}: {reason}")]
    DegenerateSurface { node: usize, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape generation failed: {0}")]
    Generation(String),

    #[error("rejected shape: H - n = {h_minus_n:e} at node {node}")]
    RejectedShape { node: usize, h_minus_n: f64 },

    #[error("precondition of {check} failed at node {node}: {detail}")]
    Precondition {
        check: String,
        node: usize,
        detail: String,
    },

    #[error("focal time reached: t = {t} >= t_focal = {t_focal}")]
    Focal { t: f64, t_focal: f64 },

    #[error("flow assumption violated at t = {t}, particle {particle}: H - n = {h_minus_n:e}")]
    FlowAssumption {
        t: f64,
        particle: usize,
        h_minus_n: f64,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}
