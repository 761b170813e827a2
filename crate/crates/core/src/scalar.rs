//! Arithmetic backend abstraction.
//!
//! Every recursion in this crate is written once, generically, and then run
//! either in exact big-rational arithmetic (the default, bit-reproducible) or
//! in `f64` (for asymptotic scans at magnitudes where rationals are too slow).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type a distribution/moment computation can run in.
///
/// Implemented for [`BigRational`] (exact) and `f64` (approximate). The trait
/// is `Clone`-based rather than `Copy`-based because big rationals own heap
/// allocations.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding), as for rationals.
    const EXACT: bool;

    /// Embeds a machine integer.
    fn from_int(v: i64) -> Self;

    /// Embeds the fraction `num/den`. `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self;

    /// Embeds an arbitrary-precision rational (exactly, where possible).
    fn from_rational(value: &BigRational) -> Self;

    /// Nearest `f64`, for reporting.
    fn to_f64(&self) -> f64;

    /// Integer power. Negative exponents require a nonzero base.
    fn powi(&self, exp: i32) -> Self;

    /// Sums a sequence. The `f64` backend compensates for rounding
    /// (Neumaier); exact backends fold naively.
    fn sum(values: impl IntoIterator<Item = Self>) -> Self {
        values.into_iter().fold(Self::zero(), |acc, v| acc + v)
    }

    /// Embeds a magnitude/count.
    fn from_usize(v: usize) -> Self {
        Self::from_int(v as i64)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(value: &BigRational) -> Self {
        value.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn powi(&self, exp: i32) -> Self {
        match exp {
            0 => Self::one(),
            e if e > 0 => Pow::pow(self.clone(), e as u32),
            e => {
                assert!(!self.is_zero(), "negative power of zero");
                Pow::pow(self.clone().recip(), (-e) as u32)
            }
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn from_rational(value: &BigRational) -> Self {
        Scalar::to_f64(value)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powi(&self, exp: i32) -> Self {
        f64::powi(*self, exp)
    }

    fn sum(values: impl IntoIterator<Item = Self>) -> Self {
        // Neumaier's variant of Kahan summation: the correction also covers
        // the case where the incoming term is larger than the running sum.
        let mut s = 0.0;
        let mut c = 0.0;
        for v in values {
            let t = s + v;
            c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
            s = t;
        }
        s + c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_ratio_reduces() {
        let x = BigRational::ratio(6, 4);
        assert_eq!(x, BigRational::ratio(3, 2));
        assert_eq!(Scalar::to_f64(&x), 1.5);
    }

    #[test]
    fn rational_powi_negative() {
        let x = BigRational::ratio(2, 3);
        assert_eq!(x.powi(-2), BigRational::ratio(9, 4));
        assert_eq!(x.powi(0), BigRational::one());
    }

    #[test]
    fn huge_rational_to_f64() {
        // num/den both overflow f64 on their own; the quotient must not.
        let big = BigInt::from(2).pow(2000u32);
        let x = BigRational::new(big.clone() + 1, big);
        assert!((Scalar::to_f64(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 + 2^-60 added 2^20 times: naive f64 summation loses the tail.
        let tiny = (0.5f64).powi(60);
        let values = std::iter::once(1.0).chain(std::iter::repeat_n(tiny, 1 << 20));
        let sum = f64::sum(values);
        let expected = 1.0 + tiny * (1 << 20) as f64;
        assert_eq!(sum, expected);
    }

    #[test]
    fn int_embedding() {
        assert_eq!(<f64 as Scalar>::from_int(-3), -3.0);
        assert_eq!(BigRational::from_usize(7), BigRational::from_int(7));
    }
}
