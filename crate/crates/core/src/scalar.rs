//! Scalar abstraction shared by every numeric module.
//!
//! All model, geometry and scaling code is written against [`Real`], which is
//! implemented for `f32` and `f64`. Dense linear algebra comes from `nalgebra`,
//! so the bound is built on its `RealField` (itself layered on `num-traits`'
//! `Num`/`FromPrimitive`) plus `ToPrimitive` for reporting.

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable throughout the crate (`f32`, `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + std::iter::Sum {}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Default + std::iter::Sum
{}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

/// Lift an `f64` literal into `T`.
#[inline]
pub fn cst<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("integer representable in scalar type")
}

/// Lossy conversion used for diagnostics and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// Relative difference `|a-b| / max(|a|,|b|, floor)`.
pub fn rel_diff<T: Real>(a: T, b: T, floor: T) -> T {
    let scale = a.abs().max(b.abs()).max(floor);
    (a - b).abs() / scale
}

/// Numerically stable `sech(x)`.
pub fn sech<T: Real>(x: T) -> T {
    let ax = x.abs();
    let e = (-ax).exp();
    (e + e) / (T::one() + e * e)
}

/// `1 - sech(x)` without cancellation for small `x`.
pub fn one_minus_sech<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < cst(0.5) {
        let s = (ax * cst(0.5)).sinh();
        (s * s + s * s) / ax.cosh()
    } else {
        T::one() - sech(ax)
    }
}

/// Stable `tanh(x)`.
pub fn tanh<T: Real>(x: T) -> T {
    if x.abs() > cst(20.0) {
        x.signum()
    } else {
        x.tanh()
    }
}
