//! Floating-point scalar abstraction: f32 or f64.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::{Debug, Display};

/// Scalar type the numeric kernels are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for converting an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64;

    /// One standard-normal draw in this precision.
    fn sample_normal<G: Rng + ?Sized>(rng: &mut G) -> Self;
}

impl Real for f32 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }

    #[inline]
    fn sample_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }

    #[inline]
    fn sample_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
        rng.sample(StandardNormal)
    }
}
