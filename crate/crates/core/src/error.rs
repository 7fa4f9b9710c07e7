use thiserror::Error;

use crate::interval::Interval;
use crate::scalar::{ExtScalar, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain mismatch: {0} vs {1}")]
    DomainMismatch(Interval, Interval),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid step function: {0}")]
    InvalidStep(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("the space has zero total measure")]
    ZeroMeasure,
    #[error("operation requires a space of finite total measure")]
    InfiniteMeasure,
    #[error("neither Ryff condition holds; witness level s = {0}")]
    RyffNeitherCondition(ExtScalar),
    #[error("a positive level set has infinite measure; no decreasing representation exists")]
    InfinitePositiveLevel,
    #[error("target range {0} escapes the rearrangement domain {1}")]
    TargetEscapesDomain(String, Interval),
    #[error("layers are not nested: {0}")]
    NonNestedLayers(String),
    #[error("mu is not absolutely continuous with respect to nu on {0}")]
    NotAbsolutelyContinuous(Interval),
    #[error("epsilon = 0 requires the weight to satisfy a Ryff condition")]
    EpsilonZeroNotAvailable,
    #[error("the increasing rearrangement of the weight vanishes identically; use the degenerate witness")]
    VstarIsZero,
    #[error("the increasing rearrangement of the weight does not vanish identically")]
    VstarNotZero,
    #[error("g* has a piece of infinite length with positive value {0}")]
    UnboundedSupportPiece(Rational),
    #[error("weight is not integrable near 0: {0}")]
    NonIntegrableWeight(String),
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("weight fails the B_p condition: {0}")]
    NotInBp(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
