use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quantum kernel quadrature needs damping > 0 (oscillatory integral does not converge)")]
    UndampedOscillatoryQuadrature,

    #[error("explicit step unstable: dt = {dt:.3e} exceeds limit {max_dt:.3e}; use dt <= {max_dt:.3e}")]
    StabilityViolation { dt: f64, max_dt: f64 },

    #[error(
        "first-order potential expansion invalid: max|U|*eps/hbar = {ratio:.3e} >= 0.1; \
         use eps <= {suggested_eps:.3e}"
    )]
    ExpansionInvalid { ratio: f64, suggested_eps: f64 },

    #[error("norm drift {drift:.3e} after step {step} exceeds {limit:.1e}")]
    NormDrift { step: usize, drift: f64, limit: f64 },

    #[error("no eigenvalue bracket for node count {nodes} in energy window [{lo}, {hi}]: {detail}")]
    NoBracket { nodes: usize, lo: f64, hi: f64, detail: String },

    #[error("interval [{a}, {b}] straddles a turning point at {turning_point}; split it first")]
    StraddlesTurningPoint { a: f64, b: f64, turning_point: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
