//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through this trait, with `f32` and `f64` as the stock instances.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable everywhere in this crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant (tolerances, literals) into the working scalar.
#[inline]
pub fn cast<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant must convert into the scalar type")
}
