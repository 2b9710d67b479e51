use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed subdomain: {0}")]
    MalformedSubdomain(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parameter out of range: {0}")]
    Domain(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A factorization failed; carries the operator diagnostics available at the time.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Non-positive curvature along a search direction. The reduced operator is
    /// coercive by construction, so this always points at a discretization bug.
    #[error("reduced operator is not positive definite: curvature {curvature:e} at iteration {iteration}")]
    NotPositiveDefinite { iteration: usize, curvature: f64 },

    #[error("dense system has {dofs} control degrees of freedom, cap is {cap}")]
    CapExceeded { dofs: usize, cap: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
