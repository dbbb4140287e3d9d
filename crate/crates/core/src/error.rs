use thiserror::Error;

/// Failures reported by meshing, assembly and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    Location { x: f64, y: f64 },

    #[error("inclusion {inclusion}: {detail}")]
    Geometry { inclusion: usize, detail: String },

    #[error("matrix is not positive definite: pivot {pivot} = {value:e} (missing Dirichlet constraints?)")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("Schur CG did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("coupling operator is rank deficient (CG breakdown at iteration {iteration}); inclusions may overlap or be under-resolved")]
    RankDeficient { iteration: usize },

    #[error("malformed input at line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
