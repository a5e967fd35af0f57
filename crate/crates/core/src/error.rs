use thiserror::Error;

/// Errors raised by model construction, the analytic routines, the forward
/// solver and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("missing parameter `{0}` for the selected family")]
    MissingParameter(&'static str),

    #[error("parameter out of range: {name} = {value} ({reason})")]
    OutOfRange {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("power-law models need an explicit state cap (`cap`)")]
    CapRequired,

    #[error("state {state} out of range [{min}, {max}]")]
    StateOutOfRange { state: u64, min: u64, max: u64 },

    #[error("operation requires a {expected} model, got {found}")]
    WrongFamily {
        expected: &'static str,
        found: &'static str,
    },

    #[error("rates {first} and {second} are not distinct within relative tolerance {tolerance:e}; use the forward solver")]
    RepeatedRates { first: f64, second: f64, tolerance: f64 },

    #[error("solver tolerance not met at t = {time}: {reason}")]
    ToleranceNotMet { time: f64, reason: String },

    #[error("expected absorption time diverges")]
    Divergent,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(name: &'static str, value: impl ToString, reason: &'static str) -> Error {
    Error::OutOfRange {
        name,
        value: value.to_string(),
        reason,
    }
}
