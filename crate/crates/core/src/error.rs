use thiserror::Error;

/// Errors raised by the numerical engines and the suite harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Gamma function has a pole at x = {0}")]
    GammaPole(f64),

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("quadrature did not reach tolerance: best value {value:e} with error estimate {error_estimate:e}")]
    ToleranceNotReached { value: f64, error_estimate: f64 },

    #[error("integrand does not vanish quadratically at the origin ({0})")]
    NonVanishingAtZero(String),

    #[error("declared decay violated: {0}")]
    DecayViolated(String),

    #[error("function is not mean-zero: |(u,1)| = {mean:e} exceeds tolerance {tol:e}")]
    MeanNotZero { mean: f64, tol: f64 },

    #[error("truncation tail cannot be bounded: {0}")]
    TailUnbounded(String),

    #[error("insufficient smoothness: {0}")]
    InsufficientSmoothness(String),

    #[error("integrand is not integrable at the frequency origin: {0}")]
    NonIntegrableOrigin(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("Richardson extrapolation did not settle: levels disagree by {0:e}")]
    NonconvergentExtrapolation(f64),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { what, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
