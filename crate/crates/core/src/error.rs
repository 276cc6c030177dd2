use thiserror::Error;

/// Errors raised by the model, solvers and analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudgetExceeded { t: f64, max_steps: u64 },

    #[error("step size underflow (h = {h:e}) at t = {t}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite solution encountered at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
