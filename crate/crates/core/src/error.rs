use thiserror::Error;

/// Errors raised while building constellations or evaluating metrics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApskError {
    #[error("ring counts sum to {got}, expected 2^{m} = {expected}")]
    RingCountMismatch { m: u32, got: usize, expected: usize },

    #[error("ring layout is inconsistent: {0}")]
    BadLayout(String),

    #[error("ring radii must be positive and strictly increasing (ring {ring})")]
    NonIncreasingRadii { ring: usize },

    #[error("constellation has coincident points ({0})")]
    DuplicatePoints(String),

    #[error("alpha = {alpha} outside [1, 2^{m}]")]
    AlphaOutOfRange { m: u32, alpha: u32 },

    #[error("last ring would hold {remainder} points with K = {rings}, alpha = {alpha}")]
    EmptyLastRing { alpha: u32, rings: usize, remainder: i64 },

    #[error("perturbation f(k) = k - c*sqrt(k) + b invalid at k = {k}: {reason}")]
    InvalidPerturbation { k: usize, reason: &'static str },

    #[error("square QAM requires an even number of bits, got m = {0}")]
    OddQam(u32),

    #[error("bits per symbol m = {0} unsupported")]
    BadBits(u32),

    #[error("minimum distance is zero")]
    ZeroDistance,

    #[error("minimum symbol energy is zero; the sensing bound needs |x|^2 >= delta > 0")]
    ZeroMinEnergy,

    #[error("block energy is zero")]
    ZeroBlockEnergy,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample count {got} below minimum {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("non-finite value in Monte Carlo accumulation")]
    NonFinite,

    #[error("constellation is not ring structured")]
    NotApsk,
}

pub type Result<T> = std::result::Result<T, ApskError>;
