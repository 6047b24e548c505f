use thiserror::Error;

/// Errors raised by distribution construction, simulation and bound computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("hazard is negative or NaN at s = {at} (value {value})")]
    NegativeHazard { at: f64, value: f64 },

    #[error("hazard is not integrable near s = {at}")]
    NonIntegrableHazard { at: f64 },

    #[error("intensity admissibility failed: F({horizon}) = {cdf} does not reach 1")]
    Inadmissible { horizon: f64, cdf: f64 },

    #[error("cannot condition on survival past {elapsed}: F({elapsed}) = 1")]
    ConditioningOnNull { elapsed: f64 },

    #[error("probability {0} is outside the admissible range")]
    InvalidProbability(f64),

    #[error("moment of order {order} is infinite")]
    InfiniteMoment { order: u32 },

    #[error("period {period}: hazard {value} at s = {at} leaves the envelope [{lower}, {upper}]")]
    EnvelopeViolation {
        period: usize,
        at: f64,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("element {element}: intensity {value} at elapsed {elapsed} leaves the envelope [{lower}, {upper}]")]
    StateEnvelopeViolation {
        element: usize,
        elapsed: f64,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("threshold Θ = {theta} must exceed Ξ = {xi}")]
    ThetaNotAboveXi { theta: f64, xi: f64 },

    #[error("no certified coupling: per-attempt failure probability π = {pi} is not below 1")]
    NoCertifiedCoupling { pi: f64 },

    #[error("inconsistent views: {0}")]
    InconsistentViews(String),

    #[error("total intensity {total} exceeds majorant {majorant} at t = {time} in state {state}")]
    MajorantViolated {
        time: f64,
        total: f64,
        majorant: f64,
        state: String,
    },

    #[error("invalid transition: {0}")]
    InvalidTransition(String),

    #[error("total intensity is not finite in state {state}")]
    UnboundedIntensity { state: String },

    #[error("step probability {prob} exceeds 1; reduce the step size")]
    StepTooLarge { prob: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("path horizon {horizon} is shorter than the requested time {requested}")]
    HorizonTooShort { horizon: f64, requested: f64 },

    #[error("sampler exhausted after {0} proposals")]
    SamplerExhausted(usize),

    #[error("dynamics not supported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
