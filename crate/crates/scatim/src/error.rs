//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by geometry construction, forward modelling, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A source/evaluation point coincides with a sensor or grid point.
    #[error("singular kernel: evaluation point within {tol} wavelengths of a source point")]
    SingularKernel { tol: f64 },

    /// The Foldy-Lax matrix is too ill-conditioned to invert reliably.
    #[error("resonant configuration: Foldy-Lax matrix condition number {cond:.3e} exceeds {limit:.1e}")]
    ResonantConfiguration { cond: f64, limit: f64 },

    /// The support submatrix of the sensing matrix is rank deficient.
    #[error("dependent support columns: sensing submatrix on the requested support is rank deficient")]
    DependentSupportColumns,

    /// The solver requires a column-normalized sensing matrix.
    #[error("sensing matrix must be column-normalized before solving")]
    NotNormalized,

    /// The iteration residual grew far beyond its running minimum.
    #[error(
        "solver diverged at iteration {iter}: residual {residual:.6e} exceeds 10x its minimum {min_residual:.6e} (step {step:.3e})"
    )]
    Diverged {
        iter: usize,
        residual: f64,
        min_residual: f64,
        step: f64,
    },

    /// A scale-separation assumption of the coherence asymptotics is violated.
    #[error("scale separation violated: {0}")]
    ScaleSeparation(String),

    /// Invalid argument or configuration value.
    #[error("{0}")]
    InvalidInput(String),

    /// Configuration file parse/validation failure, with the offending field.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
