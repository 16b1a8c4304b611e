use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the numeric core is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, rounding to nearest for narrower types.
    fn lit(v: f64) -> Self;

    fn from_f32_exact(v: f32) -> Self;

    fn to_f64_lossless(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn lit(v: f64) -> Self {
        v
    }

    #[inline]
    fn from_f32_exact(v: f32) -> Self {
        v as f64
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn from_f32_exact(v: f32) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }
}

/// `ln(2π)`.
pub(crate) fn ln_two_pi<T: Scalar>() -> T {
    T::lit(std::f64::consts::TAU.ln())
}
