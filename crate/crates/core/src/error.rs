//! Error type shared by all modules of the crate.

use thiserror::Error;

use crate::solvers::SolveTrace;

/// Errors surfaced by the covariance, eigensolver, kernel, solver,
/// classification, and generator modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix required to be positive definite was not. The payload names
    /// the matrix or assumption that failed.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    /// A matrix contained NaN or infinite entries.
    #[error("matrix contains non-finite entries")]
    NonFinite,

    /// Every eigenvalue of the pencil was nonpositive (or infinite), so no
    /// smallest positive eigenpair exists.
    #[error("pencil has no positive eigenvalue")]
    NoPositiveEigenvalue,

    /// An input vector that must be nonzero was zero.
    #[error("input vector is zero")]
    ZeroVector,

    /// The quotient denominator was nonpositive even after repair; the
    /// tolerance sets contain indefinite covariance matrices.
    #[error("quotient denominator is nonpositive; tolerance set violates positive definiteness")]
    NonpositiveDenominator,

    /// A trial has fewer than two time samples, so it cannot be centered
    /// and scaled.
    #[error("degenerate trial: {0} time sample(s), need at least 2")]
    DegenerateTrial(usize),

    /// A trial set was constructed with no trials.
    #[error("trial set contains no trials")]
    EmptyTrialSet,

    /// Trials within one set disagree on their dimensions.
    #[error("trial shape mismatch: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    TrialShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },

    /// The per-trial covariance matrices carry no usable variability
    /// (all trials identical, or too few trials for a covariance of
    /// covariances), so no tolerance model can be built.
    #[error("insufficient variability across per-trial covariances")]
    InsufficientVariability,

    /// A filtered trial had nonpositive variance, so its log-variance
    /// feature is undefined.
    #[error("degenerate variance: filter is orthogonal to the trial range")]
    DegenerateVariance,

    /// The total scatter matrix was singular and could not be repaired.
    #[error("total scatter matrix is singular")]
    SingularScatter,

    /// A classification rate was requested on an empty test set.
    #[error("empty test set")]
    EmptyTestSet,

    /// The backtracking line search exhausted its budget without finding a
    /// step with sufficient decrease. Carries the trace accumulated so far.
    #[error("line search failed after {backtracks} backtracks at iteration {iteration}")]
    LineSearchFailed {
        iteration: usize,
        backtracks: usize,
        trace: Box<SolveTrace>,
    },

    /// Invalid solver or generator configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
