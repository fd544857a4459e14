//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no cooling at this position: friction coefficient is {rho_per_s} 1/s")]
    NoCoolingAtPosition { rho_per_s: f64 },

    #[error("no stationary cooling temperature: sin(4 k0 x) must be negative here")]
    NoStationaryTemperature,

    #[error(
        "requested propagation time {requested:e} exceeds 0.95 * 2*pi/mode_spacing = {bound:e}; \
         the discrete field is periodic with period 2*pi/mode_spacing = {period:e}"
    )]
    PeriodicityBound {
        requested: f64,
        bound: f64,
        period: f64,
    },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("no stable stationary temperature: fitted cooling-rate slope is non-negative")]
    NoStableRoot,

    #[error("numerical abort at step {step}: non-finite state (norm {norm})")]
    NumericalAbort { step: u64, norm: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("dataset parse error: {0}")]
    Parse(String),

    #[error("incompatible runs: {0}")]
    IncompatibleRuns(String),
}

pub type Result<T> = std::result::Result<T, Error>;
