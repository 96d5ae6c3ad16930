use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which scalar a field stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

impl ScalarKind {
    pub fn code(self) -> u32 {
        match self {
            ScalarKind::Real => 0,
            ScalarKind::Complex => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(ScalarKind::Real),
            1 => Some(ScalarKind::Complex),
            _ => None,
        }
    }

    /// Number of `f64` components per value.
    pub fn width(self) -> usize {
        match self {
            ScalarKind::Real => 1,
            ScalarKind::Complex => 2,
        }
    }
}

/// Field value type. Implemented for `f64` and `Complex64`; damping
/// coefficients and step sizes always stay real.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn modulus_sqr(self) -> f64;
    fn is_finite(self) -> bool;
    /// `[re, im]`; the imaginary part of a real scalar is zero.
    fn parts(self) -> [f64; 2];
    fn from_parts(re: f64, im: f64) -> Self;
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn parts(self) -> [f64; 2] {
        [self, 0.0]
    }
    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    #[inline]
    fn parts(self) -> [f64; 2] {
        [self.re, self.im]
    }
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}
