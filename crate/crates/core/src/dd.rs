//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, which
//! carries roughly 32 significant decimal digits. Only the operations needed
//! for phase reduction are provided: exact products of a coupling constant by
//! large integers, followed by an exact reduction modulo a small period.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Copy, Clone, Default, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const TWO_PI: Self = Self {
        hi: std::f64::consts::TAU,
        lo: 2.449_293_598_294_706_4e-16,
    };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact for `|x| < 2^106`.
    pub fn from_i128(x: i128) -> Self {
        let hi = x as f64;
        // `hi` is the nearest double; the remainder fits in 53 bits.
        let rem = x - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rem as f64);
        Self { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(self.hi.sqrt());
        }
        let x = self.hi.sqrt();
        let y = Self::from_f64(x);
        let r = self - y * y;
        y + Self::from_f64(r.hi / (2.0 * x))
    }

    pub fn floor(self) -> Self {
        let fh = self.hi.floor();
        if fh == self.hi {
            let (hi, lo) = quick_two_sum(fh, self.lo.floor());
            Self { hi, lo }
        } else {
            Self { hi: fh, lo: 0.0 }
        }
    }

    /// Remainder in `[0, modulus)`; `modulus` must be positive.
    pub fn rem_euclid(self, modulus: Self) -> Self {
        let q = (self / modulus).floor();
        let mut r = self - modulus * q;
        if r < Self::ZERO {
            r = r + modulus;
        }
        if r >= modulus {
            r = r - modulus;
        }
        r
    }

    /// Parses a plain decimal literal such as `-0.745356`, `12`, or `2.5e-3`.
    ///
    /// The digits are accumulated exactly while they fit in ~32 significant
    /// figures, so the result is the literal rounded once to double-double.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let s = text.trim();
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (mantissa, exponent) = match body.find(['e', 'E']) {
            Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let mut acc = Self::ZERO;
        for ch in int_part.chars().chain(frac_part.chars()) {
            let d = ch.to_digit(10)?;
            acc = acc.mul_f64(10.0) + Self::from_f64(d as f64);
        }
        let scale = exponent - frac_part.len() as i32;
        let pow = Self::pow10(scale.unsigned_abs());
        let value = if scale >= 0 { acc * pow } else { acc / pow };
        Some(if neg { -value } else { value })
    }

    fn pow10(k: u32) -> Self {
        let mut out = Self::ONE;
        for _ in 0..k {
            out = out.mul_f64(10.0);
        }
        out
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::from_f64(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}{:+e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_products_are_exact() {
        let a = DoubleDouble::from_i128(123_456_789_012_345);
        let b = DoubleDouble::from_i128(987_654_321);
        let p = a * b;
        let exact: i128 = 123_456_789_012_345 * 987_654_321;
        assert_eq!(p.hi as i128 + p.lo as i128, exact);
    }

    #[test]
    fn sqrt_squares_back() {
        let five = DoubleDouble::from_f64(5.0);
        let r = five.sqrt();
        let back = r * r - five;
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn division_recovers_third() {
        let third = DoubleDouble::ONE / DoubleDouble::from_f64(3.0);
        let err = third.mul_f64(3.0) - DoubleDouble::ONE;
        assert!(err.to_f64().abs() < 1e-31);
    }

    #[test]
    fn rem_euclid_of_negative_value() {
        let x = DoubleDouble::from_f64(-5.5);
        let r = x.rem_euclid(DoubleDouble::from_f64(4.0));
        assert_eq!(r.to_f64(), 2.5);
        let y = DoubleDouble::from_i128(4_000_000_000_003);
        assert_eq!(y.rem_euclid(DoubleDouble::from_f64(4.0)).to_f64(), 3.0);
    }

    #[test]
    fn parses_decimal_literals() {
        let x = DoubleDouble::parse_decimal("0.1").unwrap();
        // 0.1 is not a double; the low word must carry the correction.
        let err = x.mul_f64(10.0) - DoubleDouble::ONE;
        assert!(err.to_f64().abs() < 1e-31);
        assert_eq!(DoubleDouble::parse_decimal("-2.5e2").unwrap().to_f64(), -250.0);
        assert_eq!(DoubleDouble::parse_decimal("12").unwrap().to_f64(), 12.0);
        assert!(DoubleDouble::parse_decimal("1.2.3").is_none());
        assert!(DoubleDouble::parse_decimal("").is_none());
        assert!(DoubleDouble::parse_decimal(".").is_none());
    }
}
