//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A denominator or matrix became (numerically) singular.
    #[error("singular: {0}")]
    Singular(String),
    /// Parameter combination deliberately not handled.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A root solve returned no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// Invalid run configuration (grid, CFL, flags).
    #[error("config error: {0}")]
    Config(String),
    /// Fields defined on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
