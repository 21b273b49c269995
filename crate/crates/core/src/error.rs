use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid demand curve at point {index}: {reason}")]
    InvalidCurve { index: usize, reason: String },

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("demand derivative is unavailable at x = {x} (kink or flat segment)")]
    DerivativeUnavailable { x: f64 },

    #[error("invalid seller offer {index}: {reason}")]
    InvalidOffer { index: usize, reason: String },

    #[error("price {price} is outside the clearing range [{p_min}, {p_max}]")]
    PriceOutsideClearingRange { price: f64, p_min: f64, p_max: f64 },

    #[error("total quantity {total} exceeds the demand at price zero ({capacity})")]
    InfeasibleQuantity { total: f64, capacity: f64 },

    #[error("invalid cost profile: {0}")]
    InvalidCosts(String),

    #[error("miner {miner} has non-positive effective reward r + B - c_w = {value}")]
    DegenerateReward { miner: usize, value: f64 },

    #[error("cover function is degenerate: clearing price {price} equals the write cost")]
    DegenerateCover { price: f64 },

    #[error("block reward bound is degenerate: {0}")]
    DegenerateBound(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("{what} did not converge after {iterations} iterations (last values {trace:?})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        trace: Vec<f64>,
    },

    #[error("{field}: {reason}")]
    Input { field: String, reason: String },
}

impl Error {
    pub fn input(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Input {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
