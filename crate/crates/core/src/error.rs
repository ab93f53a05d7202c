use thiserror::Error;

/// Errors produced by grid construction, operator application and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("grid mismatch: {context}")]
    GridMismatch { context: &'static str },

    #[error("dense operator limited to {limit} nodes, grid has {nodes}")]
    DenseTooLarge { nodes: usize, limit: usize },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
}

impl Error {
    pub fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
