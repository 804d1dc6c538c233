//! Scalar abstraction shared by the floating-point and the exact simplex paths.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic needed by the LU factorisation and the simplex engine.
///
/// The exact implementation answers every sign question exactly; the `f64`
/// implementation answers them up to the tolerances given at the call site.
pub trait Field: Clone + Debug + Send + Sync + 'static {
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn to_f64(&self) -> f64;
    fn from_f64(value: f64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Self;

    /// `self -= a * b`
    fn sub_mul_assign(&mut self, a: &Self, b: &Self);

    /// True if the value is zero, up to `tol` for inexact fields.
    fn is_zero_tol(&self, tol: f64) -> bool;
    /// True if the value is strictly below `-tol` (exactly negative for exact fields).
    fn is_neg_tol(&self, tol: f64) -> bool;
    /// True if the value is strictly above `tol` (exactly positive for exact fields).
    fn is_pos_tol(&self, tol: f64) -> bool;

    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    fn exact_zero(&self) -> bool;
}

impl Field for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(value: f64) -> Self {
        value
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
    fn is_zero_tol(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn is_neg_tol(&self, tol: f64) -> bool {
        *self < -tol
    }
    fn is_pos_tol(&self, tol: f64) -> bool {
        *self > tol
    }
    fn exact_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn from_f64(value: f64) -> Self {
        BigRational::from_float(value).unwrap_or_else(Zero::zero)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self -= a * b;
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn is_neg_tol(&self, _tol: f64) -> bool {
        self.is_negative()
    }
    fn is_pos_tol(&self, _tol: f64) -> bool {
        self.is_positive()
    }
    fn exact_zero(&self) -> bool {
        self.is_zero()
    }
}
