use thiserror::Error;

/// Failures of the physics and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(#[from] crate::params::ParamError),

    #[error("proper time `{name}` must be finite and non-negative, got {value}")]
    NegativeTime { name: &'static str, value: f64 },

    #[error("detection times must satisfy tau1 <= tau2 (got tau1 = {tau1}, tau2 = {tau2})")]
    Ordering { tau1: f64, tau2: f64 },

    #[error("time-ratio alpha must exceed 1, got {0}")]
    AlphaNotAboveOne(f64),

    #[error("tau1 must be strictly positive for a gap evaluation, got {0}")]
    NonPositiveTau(f64),

    #[error(
        "quantum asymmetry vanishes at tau1 = {tau1}, alpha = {alpha}; relative gap undefined"
    )]
    DegenerateAsymmetry { alpha: f64, tau1: f64 },

    #[error("asymmetry interval is empty at ({tau1}, {tau2}): lower {lower} > upper {upper}")]
    EmptyInterval {
        tau1: f64,
        tau2: f64,
        lower: f64,
        upper: f64,
    },

    #[error("strangeness is undefined for decay products")]
    NoStrangeness,

    #[error("probability `{name}` = {value} lies outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("schedule parameter `{name}` must be finite and non-negative, got {value}")]
    InvalidSchedule { name: &'static str, value: f64 },

    #[error("search range [{lo}, {hi}] is empty or not finite")]
    EmptyRange { lo: f64, hi: f64 },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("event count must be positive")]
    NoEvents,

    #[error("no pair survived undecayed to the detection times")]
    NoUndecayedPairs,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_time(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeTime { name, value })
    }
}
