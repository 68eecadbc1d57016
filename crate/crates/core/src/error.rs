use thiserror::Error;

/// Error type shared by all solver modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value encountered in {context} at t = {time}")]
    NonFinite { context: String, time: f64 },

    #[error("non-finite value encountered in mode k = {k} during {context}")]
    NonFiniteMode { context: String, k: f64 },

    #[error("Fock space dimension {dim} exceeds the guard {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("iterative solver failed to converge: {0}")]
    Convergence(String),
}
