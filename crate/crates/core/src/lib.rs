//! Exact computations with rearrangements of step functions on weighted intervals.

pub mod bp;
pub mod campaign;
pub mod embedding;
pub mod error;
pub mod gen;
pub mod hull;
pub mod inequalities;
pub mod interval;
pub mod mpt;
pub mod oracle;
pub mod real;
pub mod power_tail;
pub mod rearrangement;
pub mod scenario;
pub mod scalar;
pub mod space;
pub mod step;

pub use error::{Error, Result};
pub use interval::Interval;
pub use real::Real;
pub use scalar::{ExtScalar, Rational};
pub use space::WeightedSpace;
pub use step::StepFunction;
