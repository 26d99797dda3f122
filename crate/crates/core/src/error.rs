use thiserror::Error;

/// Errors shared across the crate.
///
/// Variant names follow the operation contracts; every fallible operation
/// documents which variants it can produce.
#[derive(Debug, Error)]
pub enum Error {
    #[error("requested language slice would exceed the word cap ({requested} > {cap})")]
    OversizeRequest { requested: u128, cap: u128 },

    #[error("generator emitted a word outside the ambient language at position {position}")]
    AmbientViolation { position: usize },

    #[error("words have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("index pattern is outside the supported closed-form family: {0}")]
    UnsupportedPattern(String),

    #[error("cylinder depth {depth} exceeds word length {len}")]
    DepthTooLarge { depth: usize, len: usize },

    #[error("measures live on different alphabets ({left} vs {right})")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("transition structure is reducible; stationary vector is ambiguous")]
    Reducible,

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(String),

    #[error("schedule is outside the supported normal form: {0}")]
    UnsupportedSchedule(String),

    #[error(
        "syndetic center is nonempty; the twelve-case classification requires an empty center"
    )]
    SyndeticCenterNonEmpty,

    #[error("set comparison exceeded the configured depth caps: {0}")]
    Indeterminate(String),

    #[error("no sufficiently generic word found after {attempts} attempts (length {len} too short for tolerance {tolerance})")]
    GenericityFailure {
        attempts: u32,
        len: usize,
        tolerance: f64,
    },

    #[error("subshift is not transitive")]
    NotTransitive,

    #[error("schedule config violates the growth conditions: {0}")]
    ConfigViolatesGrowth(String),

    #[error("ambient alphabet too small: need {needed} symbols, have {have}")]
    AmbientTooSmall { needed: usize, have: usize },

    #[error("target set is not a proper subset of the ambient shift")]
    NotProperSubset,

    #[error("entropy slack too tight: best achieved {achieved} nats at block length {len}, wanted {wanted}")]
    SlackTooTight {
        achieved: f64,
        wanted: f64,
        len: usize,
    },

    #[error("cylinder enumeration cap exceeded at depth {depth}")]
    DepthCap { depth: usize },

    #[error("growth condition for the cover counting failed for every r <= {cap}")]
    GrowthViolated { cap: usize },

    #[error("value {value} lies on the boundary of the integral range [{lo}, {hi}]")]
    BoundaryValue { value: f64, lo: f64, hi: f64 },

    #[error("observable is degenerate: every invariant measure has the same integral")]
    DegenerateObservable,

    #[error("sequence is not a pseudo-orbit: consecutive entries disagree at step {step}")]
    NotAPseudoOrbit { step: usize },

    #[error("pseudo-orbit too loose: delta {delta} exceeds epsilon/4 = {bound}")]
    PseudoOrbitTooLoose { delta: f64, bound: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
