use thiserror::Error;

/// Errors produced by the ensemble AQC toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed instance document: {0}")]
    Malformed(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("coupling matrix is not symmetric: J[{i}][{j}] = {a} but J[{j}][{i}] = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("coupling matrix has nonzero diagonal entry J[{i}][{i}] = {value}")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("non-finite coefficient in {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size guard exceeded: {what} = {value} exceeds limit {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("qubit ground state is degenerate ({multiplicity} corners at energy {energy})")]
    DegenerateGround { multiplicity: usize, energy: f64 },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("integration failure: {0}")]
    Integration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
