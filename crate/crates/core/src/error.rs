//! Error type shared by all modules of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by profile evaluation, mode integration, Fock-space
/// construction, and the statistics layers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A profile or parameter set violates its invariants.
    InvalidProfile(String),
    /// Evaluation outside the range covered by a tabulated profile.
    OutOfTableRange { t: f64, t_min: f64, t_max: f64 },
    /// Argument outside the mathematical domain of an operation.
    Domain(String),
    /// A stated precondition does not hold (e.g. endpoints not asymptotic).
    Precondition(String),
    /// Mismatched operands (different registries, times, wavenumbers, ...).
    Usage(String),
    /// The integrator or a residual check failed to meet its tolerance.
    Numerical(String),
    /// A squeeze or coherent parameter outside the normalizable domain.
    NonNormalizable(String),
    /// Truncation leakage exceeds the budget; `suggested` is a cutoff that fits.
    Cutoff {
        have: usize,
        suggested: usize,
        message: String,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidProfile(m) => write!(f, "invalid profile: {m}"),
            Error::OutOfTableRange { t, t_min, t_max } => {
                write!(f, "t = {t} outside tabulated range [{t_min}, {t_max}]")
            }
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Usage(m) => write!(f, "usage error: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
            Error::NonNormalizable(m) => write!(f, "non-normalizable: {m}"),
            Error::Cutoff {
                have,
                suggested,
                message,
            } => {
                write!(
                    f,
                    "cutoff {have} too small ({message}); try cutoff >= {suggested}"
                )
            }
        }
    }
}

impl std::error::Error for Error {}
