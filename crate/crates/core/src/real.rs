//! Scalar abstraction for the numerical core.
//!
//! Everything downstream of the integrator is generic over [`Real`] so the
//! same formulas can be instantiated at `f32` or `f64`. The acceptance
//! tolerances in this crate assume `f64`; an `f32` instantiation compiles and
//! runs but cannot meet them.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values at all, which no implementor does.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Real for f32 {}
impl Real for f64 {}
