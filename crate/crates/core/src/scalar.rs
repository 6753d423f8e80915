//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a grid coordinate.
    #[inline]
    fn of_i64(x: i64) -> Self {
        Self::from_i64(x).expect("grid coordinate representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance floor that is never below a few ulps of the type.
    #[inline]
    fn tol(rel: f64) -> Self {
        Self::lit(rel).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Smallest index attaining the minimum, treating values within the
/// relative tolerance of the minimum as ties.
pub(crate) fn argmin_first<T: Scalar>(values: &[T], rel: f64) -> usize {
    let mut best = T::infinity();
    for &v in values {
        if v < best {
            best = v;
        }
    }
    let slack = T::tol(rel) * (T::one() + best.abs());
    values
        .iter()
        .position(|&v| v <= best + slack)
        .unwrap_or(0)
}
