use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A structural invariant of a fractal, form or generator is violated.
    #[error("structural error: {0}")]
    Structure(String),

    /// Input failed validation (bad preset, malformed config, bad argument).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// An iterative method failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// A size guard refused the computation.
    #[error("capacity exceeded: {requested} > cap {cap}")]
    CapExceeded { requested: u64, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
