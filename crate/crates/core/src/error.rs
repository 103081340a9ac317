use alloc::string::String;
use core::fmt;

/// Errors raised by the model, samplers and estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum MarError {
    /// A model or configuration value violates its invariants.
    InvalidSpec(String),
    /// A time or component index is out of range.
    Index { what: &'static str, index: usize, bound: usize },
    /// The series is too short, constant, or contains non-finite values.
    InvalidSeries(String),
    /// The model is not stable (spectral radius of the stability matrix is at least one).
    Unstable { spectral_radius: f64 },
    /// The dense eigenvalue iteration failed to converge.
    EigenNoConvergence { dimension: usize, iterations: usize },
    /// A linear system had no unique solution.
    Singular(&'static str),
    /// A quantity that must be finite was NaN or infinite.
    NonFinite(String),
    /// Every component density underflowed at the given time index.
    DegenerateAllocation { t: usize },
    /// A Monte Carlo estimate had no usable mass.
    Estimation(String),
    /// Too few draws for the requested summary.
    InsufficientDraws { needed: usize, got: usize },
    /// The exact forecast expansion would need too many component paths.
    TooManyPaths { paths: f64, limit: usize },
}

impl fmt::Display for MarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarError::InvalidSpec(msg) => write!(f, "invalid specification: {msg}"),
            MarError::Index { what, index, bound } => {
                write!(f, "{what} index {index} out of range (bound {bound})")
            }
            MarError::InvalidSeries(msg) => write!(f, "invalid series: {msg}"),
            MarError::Unstable { spectral_radius } => {
                write!(f, "model is not stable: spectral radius {spectral_radius}")
            }
            MarError::EigenNoConvergence { dimension, iterations } => write!(
                f,
                "eigenvalue iteration did not converge for a {dimension}x{dimension} matrix after {iterations} iterations"
            ),
            MarError::Singular(what) => write!(f, "singular system: {what}"),
            MarError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            MarError::DegenerateAllocation { t } => {
                write!(f, "all component densities underflow at time index {t}")
            }
            MarError::Estimation(msg) => write!(f, "estimation failed: {msg}"),
            MarError::InsufficientDraws { needed, got } => {
                write!(f, "need at least {needed} draws, got {got}")
            }
            MarError::TooManyPaths { paths, limit } => write!(
                f,
                "exact forecast needs {paths:.0} component paths (limit {limit}); use Monte Carlo mode"
            ),
        }
    }
}

#[cfg(feature = "std")]
extern crate std;

#[cfg(feature = "std")]
impl std::error::Error for MarError {}

pub type Result<T> = core::result::Result<T, MarError>;
