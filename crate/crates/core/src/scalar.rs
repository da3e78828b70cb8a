//! Scalar abstraction used by the numerical backend.
//!
//! The simulator and operator builders are generic over `T: Real`; the IR
//! itself stores parameters as `f64` and converts at matrix-construction time.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    RealField
    + Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal or parameter.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("finite float converts to f64")
    }

    /// Tolerance used for structural checks (hermiticity, zero detection).
    fn structural_eps() -> Self {
        <Self as Float>::epsilon() * Self::lit(1024.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

pub(crate) fn from_c64<T: Real>(z: num_complex::Complex64) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}
