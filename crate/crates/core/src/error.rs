use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("total variation underflows at step {step}, before the fit window yields data")]
    WindowTooLate { step: usize },

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
}
