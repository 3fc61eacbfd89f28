use thiserror::Error;

/// Errors raised when a problem instance violates the standing model
/// assumptions or an operation's domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("correlation coefficient must lie strictly inside (0, 1), got {rho}")]
    InvalidCorrelation { rho: f64 },

    #[error("distortion must be positive and finite, got {value}")]
    InvalidDistortion { value: f64 },

    #[error("need at least two sources, got {l}")]
    InvalidSourceCount { l: usize },

    #[error("operation only defined for two sources, model has {l}")]
    NotTwoSources { l: usize },

    #[error("rate must be nonnegative and finite, got {value}")]
    InvalidRate { value: f64 },

    #[error("diagonal loading must be nonnegative, got {value}")]
    NegativeLoading { value: f64 },

    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },

    #[error("error covariance must not dominate the source covariance")]
    NotDominated,

    #[error("distortion pair ({d1}, {d2}) is not realizable as a test-channel diagonal")]
    OutsideDiagDg { d1: f64, d2: f64 },

    #[error("distortion pair ({d1}, {d2}) is realizable as a test-channel diagonal; \
             the special-case inclusion only applies outside that set")]
    InsideDiagDg { d1: f64, d2: f64 },

    #[error("error-correlation coefficient must lie strictly inside (-1, 1), got {theta}")]
    InvalidTheta { theta: f64 },

    #[error("weight vector coordinates must be positive, got ({mu1}, {mu2})")]
    NonPositiveWeight { mu1: f64, mu2: f64 },

    #[error("constraint direction has coordinates of mixed sign: ({mu1}, {mu2})")]
    MixedSignDirection { mu1: f64, mu2: f64 },

    #[error("constraint direction is zero")]
    ZeroDirection,

    #[error("no constraints supplied")]
    NoConstraints,

    #[error("achieved distortion {achieved} exceeds the target {target}")]
    DistortionExceedsTarget { achieved: f64, target: f64 },

    #[error("observation variance must lie in (0, 1], got {value}")]
    InvalidSigmaSquared { value: f64 },

    #[error("correlation {rho} exceeds the product of the source standard deviations")]
    InvalidRemoteCovariance { rho: f64 },

    #[error("remote distortion {d} must exceed the estimation floor {gamma}")]
    InfeasibleRemoteDistortion { d: f64, gamma: f64 },

    #[error("grid needs at least {min} points, got {got}")]
    InvalidGrid { min: usize, got: usize },

    #[error("simulation needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
