use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("probability space needs at least one atom")]
    EmptySpace,
    #[error("weight {weight} at atom {index} is not strictly positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightSumMismatch { sum: f64 },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value at atom {index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("probability level {0} is outside the admissible range")]
    InvalidProbability(f64),
    #[error("random variables live on different probability spaces")]
    SpaceMismatch,
    #[error("invalid benchmark curve: {0}")]
    InvalidCurve(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("family must contain at least one member")]
    EmptyFamily,
    #[error("unknown functional identifier `{0}`")]
    UnknownFunctional(String),
    #[error("gauge predicate is not monotone: X/{member} is accepted but X/{rejected} is not")]
    NotStarShapedSet { member: f64, rejected: f64 },
    #[error("translation predicate is not upward closed: X+{member} is accepted but X+{rejected} is not")]
    NotUpwardClosed { member: f64, rejected: f64 },
    #[error("lower bracket {m_lo} already lies inside the set")]
    BracketTooSmall { m_lo: f64 },
    #[error("contract violation in `{functional}`: {detail}")]
    ContractViolation { functional: String, detail: String },
    #[error("alpha grid starts at {min_alpha}, above the minimum atom probability {min_prob}")]
    GridTooCoarse { min_alpha: f64, min_prob: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
