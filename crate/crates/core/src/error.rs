use thiserror::Error;

/// Errors raised by the frame toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("input error: {0}")]
    Input(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("family is not a frame (optimal lower bound {lower:e})")]
    NotAFrame { lower: f64 },
    #[error("contraction violated: ||I - A|| = {norm}")]
    Contraction { norm: f64 },
    #[error("Theta is not kernel-valued (residual {residual:e})")]
    InconsistentTheta { residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("lattice error: {0}")]
    Lattice(String),
    #[error("operator does not commute with the lattice shifts (residual {residual:e})")]
    Structure { residual: f64 },
    #[error("restricted kernel map is singular (smallest singular value {sigma_min:e})")]
    GapHypothesis { sigma_min: f64 },
    #[error("invalid tolerance policy: {0}")]
    Tolerance(String),
}

pub type Result<T> = std::result::Result<T, FrameError>;
