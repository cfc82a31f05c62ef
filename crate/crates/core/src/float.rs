//! Float math shim for `no_std` builds.
//!
//! Under `std` the inherent `f64` methods are used directly; without it the
//! same names are provided through this extension trait, backed by `libm`.

#![cfg_attr(feature = "std", allow(dead_code))]

#[cfg(not(feature = "std"))]
#[allow(dead_code)]
pub(crate) trait FloatExt: Sized {
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn cbrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn floor(self) -> Self;
    fn ceil(self) -> Self;
    fn round(self) -> Self;
    fn copysign(self, sign: Self) -> Self;
    fn to_radians(self) -> Self;
    fn to_degrees(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

#[cfg(not(feature = "std"))]
impl FloatExt for f64 {
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn sqrt(self) -> f64 {
        libm::sqrt(self)
    }
    fn cbrt(self) -> f64 {
        libm::cbrt(self)
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn tan(self) -> f64 {
        libm::tan(self)
    }
    fn asin(self) -> f64 {
        libm::asin(self)
    }
    fn acos(self) -> f64 {
        libm::acos(self)
    }
    fn atan2(self, other: f64) -> f64 {
        libm::atan2(self, other)
    }
    fn hypot(self, other: f64) -> f64 {
        libm::hypot(self, other)
    }
    fn floor(self) -> f64 {
        libm::floor(self)
    }
    fn ceil(self) -> f64 {
        libm::ceil(self)
    }
    fn round(self) -> f64 {
        libm::round(self)
    }
    fn copysign(self, sign: f64) -> f64 {
        libm::copysign(self, sign)
    }
    fn to_radians(self) -> f64 {
        self * (core::f64::consts::PI / 180.0)
    }
    fn to_degrees(self) -> f64 {
        self * (180.0 / core::f64::consts::PI)
    }
    fn powi(self, n: i32) -> f64 {
        libm::pow(self, n as f64)
    }
}

/// Import in modules that do float math so they build without `std`.
macro_rules! use_float_ext {
    () => {
        #[cfg(not(feature = "std"))]
        #[allow(unused_imports)]
        use crate::float::FloatExt as _;
    };
}

pub(crate) use use_float_ext;
