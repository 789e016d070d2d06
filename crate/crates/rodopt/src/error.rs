use thiserror::Error;

/// Crate-wide error type. The variants map onto the CLI exit categories.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge: {context} (residual {residual:.3e} after {iterations} iterations)")]
    SolverNonConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code category for the CLI: 2 config, 3 solver, 4 io, 5 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Domain(_) => 2,
            Error::SolverNonConvergence { .. } | Error::Numerical(_) => 3,
            Error::Io(_) => 4,
        }
    }
}
