//! Coefficient arithmetic for the fast coordinate paths.
//!
//! Hot loops run on machine integers with checked operations. Any overflow
//! surfaces as `None`, and callers rerun the same computation with
//! arbitrary-precision coefficients, so results are exact either way.

use std::fmt::Debug;

use num_traits::ToPrimitive;

use crate::magnus::Int;

/// Raised when a machine-integer computation overflows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) type Checked<T> = Result<T, Overflow>;

pub(crate) trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_int(v: &Int) -> Checked<Self>;
    fn to_int(&self) -> Int;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Checked<Self>;
    fn sub(&self, o: &Self) -> Checked<Self>;
    fn mul(&self, o: &Self) -> Checked<Self>;
    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self) -> Checked<()>;

    /// Exact division by two; the caller guarantees evenness.
    fn half(&self) -> Self;

    fn neg(&self) -> Checked<Self> {
        Self::zero().sub(self)
    }

    fn as_i64(&self) -> Checked<i64> {
        ToPrimitive::to_i64(&self.to_int()).ok_or(Overflow)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }
}

impl Coeff for i64 {
    #[inline]
    fn zero() -> Self {
        0
    }
    #[inline]
    fn from_i64(v: i64) -> Self {
        v
    }
    fn from_int(v: &Int) -> Checked<Self> {
        ToPrimitive::to_i64(v).ok_or(Overflow)
    }
    fn to_int(&self) -> Int {
        Int::from(*self)
    }
    #[inline]
    fn is_zero(&self) -> bool {
        *self == 0
    }
    #[inline]
    fn add(&self, o: &Self) -> Checked<Self> {
        self.checked_add(*o).ok_or(Overflow)
    }
    #[inline]
    fn sub(&self, o: &Self) -> Checked<Self> {
        self.checked_sub(*o).ok_or(Overflow)
    }
    #[inline]
    fn mul(&self, o: &Self) -> Checked<Self> {
        self.checked_mul(*o).ok_or(Overflow)
    }
    #[inline]
    fn add_mul(&mut self, a: &Self, b: &Self) -> Checked<()> {
        let p = a.checked_mul(*b).ok_or(Overflow)?;
        *self = self.checked_add(p).ok_or(Overflow)?;
        Ok(())
    }
    fn half(&self) -> Self {
        self / 2
    }
    fn as_i64(&self) -> Checked<i64> {
        Ok(*self)
    }
}

impl Coeff for Int {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn from_i64(v: i64) -> Self {
        Int::from(v)
    }
    fn from_int(v: &Int) -> Checked<Self> {
        Ok(v.clone())
    }
    fn to_int(&self) -> Int {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Checked<Self> {
        Ok(self + o)
    }
    fn sub(&self, o: &Self) -> Checked<Self> {
        Ok(self - o)
    }
    fn mul(&self, o: &Self) -> Checked<Self> {
        Ok(self * o)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) -> Checked<()> {
        *self += a * b;
        Ok(())
    }
    fn half(&self) -> Self {
        self / 2
    }
}

/// `binomial(y, k)` for integer `y` and small `k`, exact for negative `y`.
pub(crate) fn binomial<C: Coeff>(y: i64, k: usize) -> Checked<C> {
    if k <= 4 && y.unsigned_abs() < 1 << 28 {
        let mut num: i128 = 1;
        let mut den: i128 = 1;
        for j in 0..k as i128 {
            num *= y as i128 - j;
            den *= j + 1;
        }
        return match i64::try_from(num / den) {
            Ok(v) => Ok(C::from_i64(v)),
            Err(_) => C::from_int(&Int::from(num / den)),
        };
    }
    let mut num = Int::from(1);
    let mut den = Int::from(1);
    for j in 0..k as i64 {
        num *= Int::from(y) - j;
        den *= j + 1;
    }
    C::from_int(&(num / den))
}
