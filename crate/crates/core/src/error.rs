use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("timing graph contains a cycle through node `{node}`")]
    Cycle { node: String },

    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: String, to: String },

    #[error("path enumeration exceeded the cap of {cap} paths (reached {reached})")]
    PathExplosion { cap: usize, reached: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
