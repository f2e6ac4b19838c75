//! Scalar abstraction shared by every numerical module.
//!
//! All algorithms are written once over a real field `T` and operate on
//! `Complex<T>` data. `f64` is the working precision used by the scenario
//! layer and the CLI; `f32` is supported for callers that can live with
//! single-precision tolerances.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar type the library is generic over.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + FftNum {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts an index or count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion to `f64`, used for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cz<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Complex<T>) -> bool {
    z.re.as_f64().is_finite() && z.im.as_f64().is_finite()
}

/// `e^{2πi·t}` for real `t`.
#[inline]
pub(crate) fn cis_turns<T: Real>(t: T) -> Complex<T> {
    let angle = T::two_pi() * t;
    Complex::new(angle.cos(), angle.sin())
}

/// Mathematical modulus: result always in `[0, n)`.
#[inline]
pub fn wrap(index: i64, n: usize) -> usize {
    index.rem_euclid(n as i64) as usize
}

/// `tol`, raised to `1000·ε` for scalar types too coarse to reach it.
#[inline]
pub(crate) fn scaled_tol<T: Real>(tol: f64) -> T {
    T::lit(tol).max(T::default_epsilon() * T::lit(1e3))
}
