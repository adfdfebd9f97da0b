use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// Numeric payloads are carried as `f64` whatever the scalar type of the
/// computation, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("dynamics matrix is not Hurwitz (max real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("weak-coupling stability condition fails (min mu over positive frequencies {margin:e})")]
    WeakCouplingUnstable { margin: f64 },

    #[error("eigenfrequencies {j} and {k} are degenerate (gap {gap:e})")]
    Degenerate { j: usize, k: usize, gap: f64 },

    #[error("{routine} did not converge within {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("threshold not crossed within horizon {horizon:e}")]
    Horizon { horizon: f64 },

    #[error("non-finite values encountered: {0}")]
    NonFinite(String),

    #[error("internal consistency check failed: {what} (residual {residual:e})")]
    Consistency { what: &'static str, residual: f64 },
}

impl Error {
    /// Stable snake_case identifier, used in machine-readable diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_mismatch",
            Error::Validation(_) => "validation_error",
            Error::Parameter(_) => "invalid_parameter",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotHurwitz { .. } => "not_hurwitz",
            Error::WeakCouplingUnstable { .. } => "weak_coupling_unstable",
            Error::Degenerate { .. } => "degenerate_spectrum",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Singular => "singular_system",
            Error::Horizon { .. } => "horizon_exceeded",
            Error::NonFinite(_) => "non_finite",
            Error::Consistency { .. } => "internal_consistency",
        }
    }

    /// True for input problems (bad shapes, asymmetric data, out-of-range
    /// parameters) as opposed to numeric or stability failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Dimension(_) | Error::Validation(_) | Error::Parameter(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
