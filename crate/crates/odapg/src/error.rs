//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by topology construction, problem assembly, and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Random graph sampling kept producing disconnected draws; the edge
    /// probability is too small for the requested agent count.
    #[error("no connected graph after {attempts} draws (m={m}, p={p})")]
    ConnectivityFailure { m: usize, p: f64, attempts: usize },

    /// The symmetric eigenvalue iteration did not reach its tolerance.
    #[error("eigenvalue sweep did not converge after {sweeps} sweeps (off-diagonal {residual:.3e})")]
    SpectralFailure { sweeps: usize, residual: f64 },

    /// Shapes of the operands disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A matrix required to be symmetric positive semi-definite is not.
    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NonPsd { min_eigenvalue: f64 },

    /// Malformed input file.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A dataset (or a per-agent slice of one) has no samples.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// A solver iterate picked up NaN or infinite entries; the usual cause
    /// is a smoothness constant smaller than the true Lipschitz constant.
    #[error("non-finite solver state at iteration {t}")]
    NonFiniteState { t: usize },

    /// The schedule's parameter regime does not fit the problem.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// The reference solver hit its iteration cap above tolerance.
    #[error("reference solve stopped at cap {cap} with gradient-mapping norm {achieved:.3e} (tol {tol:.3e})")]
    NoConvergence { cap: usize, achieved: f64, tol: f64 },

    /// A scalar argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
