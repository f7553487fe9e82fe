use crate::hyperbolic::Model;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the {model} model")]
    OutsideModel { model: Model, x: f64, y: f64 },
    #[error("points belong to different models")]
    MixedModels,
    #[error("coincident points")]
    Coincident,
    #[error("polygon is not simple")]
    NotSimple,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("too many polygon endpoints: {count} exceeds limit {limit}")]
    TooManyEndpoints { count: usize, limit: usize },
    #[error("quadrature did not reach tolerance (estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("{0}")]
    Solver(SolverFailure),
}

/// Details of a nonlinear solve that stopped without meeting its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverFailure {
    pub cap_index: Option<usize>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub message: String,
}

impl std::fmt::Display for SolverFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "solver failed after {} iterations (residual {:e}): {}",
            self.iterations, self.residual_norm, self.message
        )?;
        if let Some(k) = self.cap_index {
            write!(f, " [cap index {k}]")?;
        }
        Ok(())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
