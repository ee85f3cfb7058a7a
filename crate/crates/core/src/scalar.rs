//! Numeric abstraction shared by the rating math.
//!
//! Everything that only needs field arithmetic (the proportional expectation,
//! the series update, the chance factors) is written against [`Scalar`], so it
//! runs on `f32`, `f64` and exact rationals alike. The logistic two-player and
//! softmax expectations need `powf` and are bounded by [`num_traits::Float`]
//! instead.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Exact rational scalar. Suitable for single updates; long chains grow the
/// denominators quickly and can overflow `i64`.
pub type Rational = num_rational::Ratio<i64>;

pub trait Scalar:
    Copy
    + Num
    + PartialOrd
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts a configuration literal. Panics only if the target type cannot
    /// represent a finite `f64` at all, which none of the supported types do.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable in scalar type")
    }

    fn from_int(x: i64) -> Self {
        Self::from_i64(x).expect("integer representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Copy
        + Num
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}
