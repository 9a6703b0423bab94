//! Scalar abstraction shared by every closed form in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the model is evaluated in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x` lies in the open unit interval.
#[inline]
pub(crate) fn in_open_unit<T: Real>(x: T) -> bool {
    x > T::zero() && x < T::one()
}

/// `x` lies in the closed unit interval.
#[inline]
pub(crate) fn in_closed_unit<T: Real>(x: T) -> bool {
    x >= T::zero() && x <= T::one()
}
