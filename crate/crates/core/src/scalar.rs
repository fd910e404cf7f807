//! Floating-point abstraction shared by the numerical kernels.

use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Real scalar type the numerical code is generic over (`f32` or `f64`).
pub trait Scalar: NdFloat + FromPrimitive + Default + std::iter::Sum {
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
