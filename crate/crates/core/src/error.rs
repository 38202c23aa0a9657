use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An operation was asked to act outside its domain (divergent tail,
    /// interval outside the grid, unbounded orbit, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve hit a pivot below the singularity threshold.
    #[error("matrix is numerically singular (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    /// A superlevel set of the function has infinite weighted measure.
    #[error("decreasing rearrangement undefined: {0}")]
    RearrangementUndefined(String),

    /// A fit or optimisation did not reach the requested accuracy.
    #[error("estimation failed: {reason} (gap {gap:.3e})")]
    Estimation { reason: String, gap: f64 },

    /// The function space fails `min(1, 1/t) ∈ Φ`, so the interpolation space is {0}.
    #[error("trivial interpolation space: {0}")]
    TrivialSpace(String),

    /// The contour truncation bound exceeds the requested tolerance.
    #[error(
        "contour range too short: truncation bound {bound:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    ContourRange { bound: f64, tolerance: f64 },

    /// The trace construction ran out of depth before `|a_n|_X` became small.
    #[error("trace construction needs a finer grid: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    Refinement { residual: f64, tolerance: f64 },

    /// The operator is required to be invertible.
    #[error("operator is not invertible")]
    NotInvertible,

    /// Cauchy problem solver failure.
    #[error("solver error: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
