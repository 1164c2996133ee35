use thiserror::Error;

/// Errors raised by the solvers, the estimator and the reliability harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at time level {level} (node {node}); the march is unstable")]
    Instability { level: usize, node: usize },

    #[error("time step {dt} s exceeds the explicit stability limit {limit} s")]
    StabilityLimit { dt: f64, limit: f64 },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("sensitivity vanishes on the observation schedule; the parameter direction is not identifiable")]
    NonIdentifiable,

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("{0}")]
    OffGrid(String),

    #[error("reference solver did not reach {target} K after {doublings} refinements (last change {last_change} K)")]
    ReferenceNotConverged {
        target: f64,
        doublings: usize,
        last_change: f64,
    },

    #[error("reference accuracy {estimate} K is not below {limit} K (sigma_obs / 10)")]
    ReferenceAccuracy { estimate: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad user input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::OffGrid(_)
                | Error::LengthMismatch { .. }
                | Error::StabilityLimit { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
