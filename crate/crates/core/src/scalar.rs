use nalgebra::RealField;
use num_traits::FromPrimitive;
use serde::{de::DeserializeOwned, Serialize};
use std::fmt::Display;
use std::iter::Sum;

/// Scalar type the numeric core is generic over: `f32` or `f64`.
///
/// `RealField` supplies the elementary functions used by the linear algebra
/// and the learners; the remaining items cover conversions and the infinities
/// needed by diagnostics such as VIF.
pub trait Real:
    RealField + FromPrimitive + Sum + Serialize + DeserializeOwned + Default + Copy + Display
{
    fn infinity() -> Self;
    fn is_finite(self) -> bool;
    fn to_f64(self) -> f64;

    /// Lossy conversion from an `f64` constant.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite constant")
    }

    fn from_count(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
}
