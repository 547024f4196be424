//! Extended-range real numbers.
//!
//! Modified Bessel functions of large argument grow or decay like `e^{±z}`,
//! and the ratios built from them (`l/k`, `l'/k'`) grow like `e^{2z}`. A
//! [`ScaledValue`] stores a real number as a signed mantissa in `[0.5, 1)`
//! and a binary exponent, so that products and quotients of such factors
//! never overflow and converting a finite `f64` in and out is exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

const LN2_HI: f64 = 6.931_471_803_691_238_164_90e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_700_02e-10;

/// A real number `sign * exp(log_mag)` held as `mant * 2^exp2`.
#[derive(Clone, Copy, PartialEq)]
pub struct ScaledValue {
    mant: f64,
    exp2: i64,
}

impl ScaledValue {
    pub const ZERO: ScaledValue = ScaledValue { mant: 0.0, exp2: 0 };
    pub const ONE: ScaledValue = ScaledValue { mant: 0.5, exp2: 1 };

    fn normalized(mant: f64, exp2: i64) -> Self {
        if mant == 0.0 || !mant.is_finite() {
            return if mant == 0.0 {
                Self::ZERO
            } else {
                ScaledValue { mant, exp2: 0 }
            };
        }
        let (m, e) = frexp(mant);
        ScaledValue {
            mant: m,
            exp2: exp2 + e,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        Self::normalized(v, 0)
    }

    /// `sign * exp(log_mag)`; `sign == 0` or `log_mag == -inf` gives zero.
    pub fn from_parts(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let v = Self::exp(log_mag);
        if sign < 0 {
            -v
        } else {
            v
        }
    }

    /// `exp(x)` without overflow.
    pub fn exp(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        if !x.is_finite() {
            return ScaledValue { mant: x, exp2: 0 };
        }
        let n = (x / std::f64::consts::LN_2).floor();
        let r = (x - n * LN2_HI) - n * LN2_LO;
        Self::normalized(r.exp(), n as i64)
    }

    pub fn sign(self) -> i8 {
        if self.mant > 0.0 {
            1
        } else if self.mant < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Natural log of the absolute value; `-inf` for zero.
    pub fn log_mag(self) -> f64 {
        if self.mant == 0.0 {
            return f64::NEG_INFINITY;
        }
        let e = self.exp2 as f64;
        self.mant.abs().ln() + e * LN2_HI + e * LN2_LO
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.mant.is_finite()
    }

    /// Plain value; saturates to `±inf` or `0` outside the `f64` range.
    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp2)
    }

    pub fn abs(self) -> Self {
        ScaledValue {
            mant: self.mant.abs(),
            exp2: self.exp2,
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// `|self|^p` carrying the sign of `self` for integer-free use; callers
    /// take powers of positive quantities only.
    pub fn powf(self, p: f64) -> Self {
        debug_assert!(self.mant >= 0.0);
        if self.is_zero() {
            return if p > 0.0 { Self::ZERO } else { Self::exp(f64::INFINITY) };
        }
        Self::exp(p * self.log_mag())
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::normalized(self.mant * factor, self.exp2)
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.exp2 >= other.exp2 {
            (self, other)
        } else {
            (other, self)
        };
        let shift = big.exp2 - small.exp2;
        if shift > 1100 {
            return big;
        }
        Self::normalized(big.mant + ldexp(small.mant, -shift), big.exp2)
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }
}

impl Default for ScaledValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<f64> for ScaledValue {
    fn from(v: f64) -> Self {
        Self::from_f64(v)
    }
}

impl Neg for ScaledValue {
    type Output = Self;
    fn neg(self) -> Self {
        ScaledValue {
            mant: -self.mant,
            exp2: self.exp2,
        }
    }
}

impl Mul for ScaledValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mant * rhs.mant, self.exp2 + rhs.exp2)
    }
}

impl Mul<f64> for ScaledValue {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self * ScaledValue::from_f64(rhs)
    }
}

impl Div for ScaledValue {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::normalized(self.mant / rhs.mant, self.exp2 - rhs.exp2)
    }
}

impl PartialOrd for ScaledValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.sub(*other);
        if diff.mant.is_nan() {
            return None;
        }
        diff.mant.partial_cmp(&0.0)
    }
}

impl fmt::Debug for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScaledValue({}e^{:.6})", self.sign(), self.log_mag())
    }
}

impl fmt::Display for ScaledValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() > 1e-300) {
            write!(f, "{v:e}")
        } else {
            write!(f, "{}exp({})", if self.sign() < 0 { "-" } else { "" }, self.log_mag())
        }
    }
}

/// Split a finite nonzero `v` into `m * 2^e` with `|m|` in `[0.5, 1)`.
fn frexp(v: f64) -> (f64, i64) {
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal
        let (m, e) = frexp(v * f64::from_bits(0x43f0_0000_0000_0000)); // 2^64
        return (m, e - 64);
    }
    let e = raw_exp - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e)
}

/// `m * 2^e`, saturating.
fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    if e > 2100 {
        return m.signum() * f64::INFINITY;
    }
    if e < -2200 {
        return m.signum() * 0.0;
    }
    let mut x = m;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_encodings_agree() {
        assert_eq!(ScaledValue::from_f64(0.0).sign(), 0);
        assert_eq!(ScaledValue::ZERO.log_mag(), f64::NEG_INFINITY);
        assert!(ScaledValue::from_parts(1, f64::NEG_INFINITY).is_zero());
        assert!(ScaledValue::from_parts(0, 3.0).is_zero());
    }

    #[test]
    fn survives_huge_exponents() {
        let a = ScaledValue::exp(4000.0);
        let b = ScaledValue::exp(-3990.0);
        let p = a * b;
        assert!((p.to_f64() - 10f64.exp()).abs() < 1e-9 * 10f64.exp());
        assert!((a.log_mag() - 4000.0).abs() < 1e-12);
        assert_eq!(a.to_f64(), f64::INFINITY);
    }

    #[test]
    fn addition_with_cancellation() {
        let a = ScaledValue::from_f64(1.5);
        let b = ScaledValue::from_f64(-1.25);
        assert_eq!(a.add(b).to_f64(), 0.25);
        assert!(a.sub(a).is_zero());
        assert!(a > b);
    }

    proptest! {
        #[test]
        fn f64_round_trip_is_exact(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL) {
            prop_assert_eq!(ScaledValue::from_f64(v).to_f64(), v);
        }

        #[test]
        fn log_form_round_trip(v in -1e300f64..1e300) {
            prop_assume!(v != 0.0);
            let s = ScaledValue::from_f64(v);
            let back = ScaledValue::from_parts(s.sign(), s.log_mag()).to_f64();
            // exp(ln v) carries the rounding of ln v, |ln v| ulps at most
            prop_assert!((back - v).abs() <= 4.0 * f64::EPSILON * v.abs() * (1.0 + v.abs().ln().abs()));
        }

        #[test]
        fn product_matches_plain(a in -1e100f64..1e100, b in -1e100f64..1e100) {
            let p = (ScaledValue::from_f64(a) * ScaledValue::from_f64(b)).to_f64();
            prop_assert!((p - a * b).abs() <= f64::EPSILON * (a * b).abs());
        }
    }
}
