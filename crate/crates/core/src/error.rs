use thiserror::Error;

use crate::solver::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mu = {mu} lies inside the excluded band |mu| < {delta}")]
    OutOfRegime { mu: f64, delta: f64 },

    #[error("source value {value:e} at x = {x} is below the floor 1e-8")]
    DegenerateSource { x: f64, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("argument {0} outside the strip |Im z| <= 30")]
    Range(num_complex::Complex64),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("quadrature failed: {message} (estimated error {achieved:e})")]
    Quadrature { message: String, achieved: f64 },

    #[error("no exit: log-amplitude stays negative on [{lo}, {hi}] at x = {x}")]
    NoExit { x: f64, lo: f64, hi: f64 },

    #[error("solution diverged at x = {x}, mu = {mu}")]
    Divergence {
        x: f64,
        mu: f64,
        partial: Option<Box<Trajectory>>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::OutOfRegime { .. }
                | Error::DegenerateSource { .. }
                | Error::Unsupported(_)
                | Error::Range(_)
                | Error::Config(_)
        )
    }
}
