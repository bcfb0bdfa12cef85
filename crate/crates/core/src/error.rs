use thiserror::Error;

pub type Result<T> = std::result::Result<T, HopfError>;

#[derive(Debug, Error)]
pub enum HopfError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("integration left the admissible range at t = {t}")]
    BlowUp { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("no solution found ({sign_change_cells} sign-change cells, {seeds_tried} seeds tried)")]
    NoSolution { sign_change_cells: usize, seeds_tried: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
