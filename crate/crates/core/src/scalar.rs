//! Scalar abstraction shared by every numerical module.

use nalgebra as na;
use num_traits as nt;

/// Real field the whole crate is generic over (`f32` or `f64`).
pub trait Real:
    na::RealField + Copy + Default + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + rustfft::FftNum
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

