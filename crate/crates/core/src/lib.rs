//! Group mutual information for codes over finite Abelian groups.
//!
//! [`group`] decomposes groups into prime-power rings. [`info`] measures
//! information over coset partitions. [`rate`] solves the source and channel
//! min-max problems. [`ensemble`] checks the random homomorphism ensemble at
//! desk scale. [`io`] reads problem files and writes records.
//!
//! The optimizer is generic over [`Scalar`]; the aliases below fix the usual
//! choices.

// `!(x >= 0.0)` style checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod group;
pub mod info;
pub mod io;
pub mod rate;
pub mod scalar;

pub use error::{Error, Result};
pub use group::{decompose, GroupElement, GroupSpec, Ring, Subgroup, ThetaVector};
pub use info::{ChannelSpec, Distribution, SourceJoint};
pub use rate::{icc, isc, RateResult, Sense, SolverOptions, Support, WeightVector};
pub use scalar::{Extended, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

/// Rate result computed in `f64`.
pub type FloatRate = RateResult<f64>;
/// Rate result computed in single precision.
pub type Float32Rate = RateResult<f32>;
/// Rate result with exact feasibility decisions.
pub type ExactRate = RateResult<Exact>;
