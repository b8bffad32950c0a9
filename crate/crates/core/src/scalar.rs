//! Scalar abstraction for the weight-space optimizer.
//!
//! The rate functionals are ratios of linear forms in the weights, so the
//! optimizer only needs field operations and an ordering. Floating point
//! types give fast answers; [`BigRational`] gives exact feasibility
//! decisions.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive {
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Converts an `f64`, exactly when the type can represent it.
    fn lift(x: f64) -> Self;

    /// Nearest `f64`.
    fn lower(&self) -> f64;

    /// `log2(n)` if representable in this type.
    fn log2_int(n: u64) -> Option<Self>;

    /// Slack allowed when testing `x >= 0`.
    fn slack() -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

macro_rules! impl_float_scalar {
    ($t:ty, $slack:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn lift(x: f64) -> Self {
                x as $t
            }

            fn lower(&self) -> f64 {
                *self as f64
            }

            fn log2_int(n: u64) -> Option<Self> {
                Some(Float::log2(n as $t))
            }

            fn slack() -> Self {
                $slack
            }
        }
    };
}

impl_float_scalar!(f64, 1e-12);
impl_float_scalar!(f32, 1e-5);

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn lift(x: f64) -> Self {
        // every finite f64 is a dyadic rational
        BigRational::from_float(x).expect("finite value")
    }

    fn lower(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn log2_int(n: u64) -> Option<Self> {
        if n.is_power_of_two() {
            Some(BigRational::from_integer(BigInt::from(n.trailing_zeros())))
        } else {
            None
        }
    }

    fn slack() -> Self {
        BigRational::zero()
    }
}

/// A value that may be `+∞` (a ratio whose denominator vanished while the
/// numerator did not).
#[derive(Clone, Debug, PartialEq)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Extended<T> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(x) => x.lower(),
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }
}

impl<T: Scalar> PartialOrd for Extended<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Equal),
        }
    }
}

impl<T: Scalar> Display for Extended<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Builds a scalar from a small ratio of integers.
pub fn ratio<T: Scalar>(num: i64, den: i64) -> T {
    T::from_i64(num).expect("small integer") / T::from_i64(den).expect("small integer")
}
