use thiserror::Error;

/// Errors raised by the computation modules.
///
/// The variants are grouped so that the command-line front end can map them
/// onto distinct exit statuses (validation, numerical, statistical).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation (malformed profile, bad curve, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A configuration value is out of range.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition of the operation does not hold for this input.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An iterative or quadrature routine did not reach its tolerance.
    #[error("numerical error: {what} (achieved residual {residual:e})")]
    Numerical { what: String, residual: f64 },

    /// No near-return of a trajectory was found within the time horizon.
    #[error("resolution error: no near-return within horizon {horizon}; try a larger horizon")]
    Resolution { horizon: f64 },

    /// A parameter subinterval contains no admissible rational torus.
    #[error("coverage error: no rational torus with max(p,q) <= {max_pq} in [{lo}, {hi}]")]
    Coverage { lo: f64, hi: f64, max_pq: u32 },
}

impl Error {
    pub(crate) fn numerical(what: impl Into<String>, residual: f64) -> Self {
        Error::Numerical { what: what.into(), residual }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
