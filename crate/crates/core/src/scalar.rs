//! Exact rational scalars extended with `+∞`.
//!
//! Every length, measure and function value in the crate is an [`ExtScalar`].
//! Arithmetic follows measure-theoretic conventions: `+∞` absorbs addition and
//! multiplication by positive values, and `0 · ∞ = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Builds the rational `num / den`. Panics when `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses the literal grammar `[-]?[0-9]+(/[1-9][0-9]*)?`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("malformed rational literal {text:?}"));
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = match den {
        Some(d) => {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) || d.starts_with('0') {
                return Err(bad());
            }
            d.parse().map_err(|_| bad())?
        }
        None => BigInt::one(),
    };
    Ok(Rational::new(num * sign, den))
}

/// Prints a rational as `p/q`, or `p` when integral.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Lossy conversion used by reports and the floating oracle.
pub fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators/denominators: scale through the bit lengths.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift >= 0 {
        Rational::new(n.clone(), d.clone() << (shift as usize))
    } else {
        Rational::new(n.clone() << ((-shift) as usize), d.clone())
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Exact conversion of a finite `f64` into a rational.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Exact rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtScalar {
    Finite(Rational),
    Infinite,
}

impl ExtScalar {
    pub fn zero() -> Self {
        ExtScalar::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        ExtScalar::Finite(Rational::one())
    }

    pub fn infinity() -> Self {
        ExtScalar::Infinite
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ExtScalar::Finite(rat(num, den))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtScalar::Finite(q) if q.is_zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtScalar::Infinite)
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, ExtScalar::Finite(q) if q.is_negative())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtScalar::Finite(q) => Some(q),
            ExtScalar::Infinite => None,
        }
    }

    /// Returns the finite value or panics; for call sites where finiteness is an invariant.
    pub fn expect_finite(&self, what: &str) -> &Rational {
        self.finite()
            .unwrap_or_else(|| panic!("{what} must be finite"))
    }

    /// `self - other`, defined unless the subtrahend is infinite.
    pub fn checked_sub(&self, other: &ExtScalar) -> Option<ExtScalar> {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => Some(ExtScalar::Finite(a - b)),
            (ExtScalar::Infinite, ExtScalar::Finite(_)) => Some(ExtScalar::Infinite),
            (_, ExtScalar::Infinite) => None,
        }
    }

    /// Integer power; `∞^0 = 1`, `0^0 = 1`.
    pub fn powi(&self, exp: u32) -> ExtScalar {
        match self {
            ExtScalar::Finite(q) => ExtScalar::Finite(num_traits::pow(q.clone(), exp as usize)),
            ExtScalar::Infinite if exp == 0 => ExtScalar::one(),
            ExtScalar::Infinite => ExtScalar::Infinite,
        }
    }

    pub fn min(self, other: ExtScalar) -> ExtScalar {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtScalar) -> ExtScalar {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtScalar::Finite(q) => rational_to_f64(q),
            ExtScalar::Infinite => f64::INFINITY,
        }
    }

    /// Absolute difference of two finite values; `∞` otherwise.
    pub fn abs_diff(&self, other: &ExtScalar) -> ExtScalar {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite((a - b).abs()),
            _ => ExtScalar::Infinite,
        }
    }
}

impl From<Rational> for ExtScalar {
    fn from(q: Rational) -> Self {
        ExtScalar::Finite(q)
    }
}

impl From<i64> for ExtScalar {
    fn from(n: i64) -> Self {
        ExtScalar::Finite(int(n))
    }
}

impl PartialOrd for ExtScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => a.cmp(b),
            (ExtScalar::Finite(_), ExtScalar::Infinite) => Ordering::Less,
            (ExtScalar::Infinite, ExtScalar::Finite(_)) => Ordering::Greater,
            (ExtScalar::Infinite, ExtScalar::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for &ExtScalar {
    type Output = ExtScalar;

    fn add(self, rhs: &ExtScalar) -> ExtScalar {
        match (self, rhs) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite(a + b),
            _ => ExtScalar::Infinite,
        }
    }
}

impl Add for ExtScalar {
    type Output = ExtScalar;

    fn add(self, rhs: ExtScalar) -> ExtScalar {
        &self + &rhs
    }
}

// 0 · ∞ = 0. Infinite operands are only ever paired with nonnegative values.
impl Mul for &ExtScalar {
    type Output = ExtScalar;

    fn mul(self, rhs: &ExtScalar) -> ExtScalar {
        if self.is_zero() || rhs.is_zero() {
            return ExtScalar::zero();
        }
        match (self, rhs) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite(a * b),
            _ => ExtScalar::Infinite,
        }
    }
}

impl Mul for ExtScalar {
    type Output = ExtScalar;

    fn mul(self, rhs: ExtScalar) -> ExtScalar {
        &self * &rhs
    }
}

impl std::iter::Sum for ExtScalar {
    fn sum<I: Iterator<Item = ExtScalar>>(iter: I) -> ExtScalar {
        iter.fold(ExtScalar::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::Finite(q) => f.write_str(&format_rational(q)),
            ExtScalar::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            Ok(ExtScalar::Infinite)
        } else {
            parse_rational(s).map(ExtScalar::Finite)
        }
    }
}

impl serde::Serialize for ExtScalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for ExtScalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for plain [`Rational`] fields written as literal strings.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = <String as serde::Deserialize>::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}
