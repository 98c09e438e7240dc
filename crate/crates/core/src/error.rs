use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Hurst parameter outside the open interval (0, 1).
    InvalidHurst { value: f64 },
    /// A time grid violated one of its invariants.
    InvalidGrid { reason: String },
    /// Generic domain violation for a scalar argument.
    Domain { what: &'static str, value: f64 },
    /// Kernel evaluation requested on the singular set {t = 0, s = 0, t = s}.
    SingularKernelInput { t: f64, s: f64 },
    /// Covariance matrix failed to factor even after diagonal regularization.
    NotPositiveDefinite {
        size: usize,
        hurst: f64,
        detail: String,
    },
    /// Circulant embedding produced an eigenvalue below the clip tolerance.
    NegativeEigenvalue { min_eigenvalue: f64, tolerance: f64 },
    /// An operation that requires the grid to contain t = 0.
    GridMissingZero,
    /// A sampler precondition on ensemble label or grid failed.
    EnsembleMismatch { reason: String },
    /// The grid does not cover the effective support of a test function.
    SupportNotCovered { uncovered_mass: f64 },
    /// Adaptive quadrature ran out of subdivisions.
    QuadratureDidNotConverge { best_estimate: f64, residual: f64 },
    /// Parameters for the chaos measure outside their admissible range.
    InvalidGmcParams { reason: String },
    /// Moment of a ball mass became non-finite for a given (q, r).
    NonFiniteMoment { q: f64, r: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidHurst { value } => {
                write!(f, "Hurst parameter must lie in (0, 1), got {value}")
            }
            Error::InvalidGrid { reason } => write!(f, "invalid time grid: {reason}"),
            Error::Domain { what, value } => write!(f, "domain error: {what} (got {value})"),
            Error::SingularKernelInput { t, s } => {
                write!(f, "kernel undefined at singular input (t={t}, s={s})")
            }
            Error::NotPositiveDefinite { size, hurst, detail } => write!(
                f,
                "covariance matrix ({size}x{size}, H={hurst}) not positive definite: {detail}"
            ),
            Error::NegativeEigenvalue { min_eigenvalue, tolerance } => write!(
                f,
                "circulant embedding eigenvalue {min_eigenvalue} below tolerance -{tolerance}"
            ),
            Error::GridMissingZero => write!(f, "operation requires a grid containing t = 0"),
            Error::EnsembleMismatch { reason } => write!(f, "ensemble mismatch: {reason}"),
            Error::SupportNotCovered { uncovered_mass } => write!(
                f,
                "grid does not cover test-function support: uncovered |f| mass approx {uncovered_mass}"
            ),
            Error::QuadratureDidNotConverge { best_estimate, residual } => write!(
                f,
                "quadrature did not converge: best estimate {best_estimate}, residual {residual}"
            ),
            Error::InvalidGmcParams { reason } => write!(f, "invalid chaos-measure parameters: {reason}"),
            Error::NonFiniteMoment { q, r } => {
                write!(f, "non-finite moment at q={q}, r={r}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
