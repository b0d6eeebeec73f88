use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeylError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge on {what}: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },
    #[error("t = {t} exceeds the trusted range t_trust = {t_trust}")]
    Trust { t: f64, t_trust: f64 },
    #[error("lambda = {lambda} is at or below the bottom of the spectrum ({bottom})")]
    Pole { lambda: f64, bottom: f64 },
    #[error("basis of size {basis} needs {required_bytes} bytes, budget is {budget_bytes}")]
    Resource {
        basis: usize,
        required_bytes: u64,
        budget_bytes: u64,
    },
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("series is not contracting: |r({next})/r({prev})| = {ratio:.3}; reduce epsilon or |gamma|")]
    NotContracting { prev: usize, next: usize, ratio: f64 },
    #[error("degenerate fit: {0}")]
    Fit(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WeylError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(WeylError::Domain(msg.into()))
}
