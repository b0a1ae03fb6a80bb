//! Floating point abstraction used by the belief kernel and reward arithmetic.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_index(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("index representable")
    }

    #[inline]
    fn from_coord(v: i32) -> Self {
        <Self as FromPrimitive>::from_i32(v).expect("coordinate representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
