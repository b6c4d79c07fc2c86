use thiserror::Error;

use crate::solver::SolveReport;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain: {reason}")]
    Domain { name: &'static str, value: f64, reason: &'static str },
    #[error("t = {t} lies outside the tabulated range [0, {max}]")]
    OutOfTable { t: f64, max: f64 },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("no convergence after {iterations} iterations, bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("region contains no lattice nodes")]
    EmptyRegion,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inadmissible function: {0}")]
    Inadmissible(String),
    #[error("radial integral diverges (local log-log slope {slope:.6})")]
    Divergent { slope: f64 },
    #[error("i/o: {0}")]
    Io(String),
    #[error("solver did not converge in {} iterations (residual {:e} > {:e})", .0.iterations, .0.residual_norm, .0.tolerance)]
    NotConverged(Box<SolveReport>),
    #[error("line search stagnated after {} iterations (residual {:e})", .0.iterations, .0.residual_norm)]
    Stagnation(Box<SolveReport>),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
