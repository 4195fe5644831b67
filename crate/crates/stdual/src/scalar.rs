//! Floating point scalar abstraction shared by the classical and spectral code.

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar usable by the generic parts of the crate (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Reduces into `[0, period)`.
    #[inline]
    fn modulo(self, period: Self) -> Self {
        let r = self % period;
        if r < Self::zero() {
            r + period
        } else {
            r
        }
    }

    /// Reduces an angle into `(-pi, pi]`.
    #[inline]
    fn wrap_pi(self) -> Self {
        let tau = Self::TAU();
        let r = (self + Self::PI()).modulo(tau) - Self::PI();
        if r == -Self::PI() {
            Self::PI()
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
