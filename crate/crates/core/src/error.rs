use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the routine is defined.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An iterative routine ran out of budget before meeting its tolerance.
    #[error("{what} did not converge (best estimate {best_estimate:e}, error estimate {error_estimate:e})")]
    NonConvergence {
        what: &'static str,
        best_estimate: f64,
        error_estimate: f64,
    },

    /// A Gamma-function pole makes a closed-form expansion degenerate.
    #[error("gamma pole: {0}")]
    GammaPole(String),

    /// The requested L^r error is not finite for this input.
    #[error("integrability violation: {0}")]
    Integrability(String),

    /// Coefficients grew past the representable range.
    #[error("ill-conditioned construction: {0}")]
    IllConditioned(String),

    /// An index or length argument is out of range.
    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    /// A configured size limit was exceeded.
    #[error("limit exceeded: {0}")]
    Limit(String),

    /// A regression had no usable spread in its inputs.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The regime classification rejected the parameter set.
    #[error("invalid regime: {0}")]
    RegimeInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
