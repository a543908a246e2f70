//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the library is generic over: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn fl<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("f64 literal must convert into the scalar type")
}
