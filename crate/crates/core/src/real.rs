//! Rational enclosures of real numbers.
//!
//! Rationals are not closed under rational powers, so values such as
//! `(3/2)^(1/2)` or `ln 2` are carried as a closed interval `[lo, hi]` with
//! rational endpoints. Exact values are the degenerate case `lo == hi`.
//! Roots are enclosed to a relative width below `2^-133 ≈ 10^-40`, logarithms
//! to an absolute width below `2^-190`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::scalar::{format_rational, int, ExtScalar, Rational};

/// Guaranteed bits of relative precision for root enclosures.
const ROOT_BITS: u64 = 133;
/// Fixed-point scale used by the logarithm series.
const LOG_BITS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    lo: ExtScalar,
    hi: ExtScalar,
}

impl Real {
    pub fn exact(x: ExtScalar) -> Self {
        Real { lo: x.clone(), hi: x }
    }

    pub fn from_rational(q: Rational) -> Self {
        Real::exact(ExtScalar::Finite(q))
    }

    pub fn zero() -> Self {
        Real::exact(ExtScalar::zero())
    }

    pub fn one() -> Self {
        Real::exact(ExtScalar::one())
    }

    pub fn infinity() -> Self {
        Real::exact(ExtScalar::Infinite)
    }

    /// Panics when `lo > hi`.
    pub fn between(lo: ExtScalar, hi: ExtScalar) -> Self {
        assert!(lo <= hi, "empty enclosure [{lo}, {hi}]");
        Real { lo, hi }
    }

    pub fn lo(&self) -> &ExtScalar {
        &self.lo
    }

    pub fn hi(&self) -> &ExtScalar {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact_value(&self) -> Option<&ExtScalar> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn is_infinite(&self) -> bool {
        self.lo.is_infinite()
    }

    /// Certainly finite.
    pub fn is_finite(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// `self ≤ other` is consistent with both enclosures.
    pub fn possibly_le(&self, other: &Real) -> bool {
        self.lo <= other.hi
    }

    /// `self ≤ other` holds for every point of both enclosures.
    pub fn certainly_le(&self, other: &Real) -> bool {
        self.hi <= other.lo
    }

    /// The two enclosures share a point.
    pub fn overlaps(&self, other: &Real) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `(hi - lo) / |lo|`; zero for exact values, infinite when unbounded.
    pub fn relative_width(&self) -> f64 {
        if self.is_exact() {
            return 0.0;
        }
        match (&self.lo, &self.hi) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => {
                if a.is_zero() {
                    f64::INFINITY
                } else {
                    crate::scalar::rational_to_f64(&((b - a) / a.abs()))
                }
            }
            _ => f64::INFINITY,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match (&self.lo, &self.hi) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => {
                crate::scalar::rational_to_f64(&((a + b) / int(2)))
            }
            _ => f64::INFINITY,
        }
    }

    /// A rational inside the enclosure (the lower endpoint), if finite.
    pub fn lower_rational(&self) -> Option<&Rational> {
        self.lo.finite()
    }

    pub fn add(&self, other: &Real) -> Real {
        Real { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Difference of finite enclosures.
    pub fn sub(&self, other: &Real) -> Real {
        let lo = self.lo.checked_sub(&other.hi).expect("finite subtrahend");
        let hi = self.hi.checked_sub(&other.lo).expect("finite subtrahend");
        Real { lo, hi }
    }

    pub fn mul(&self, other: &Real) -> Real {
        let all_finite = self.hi.is_finite() && other.hi.is_finite();
        if !all_finite {
            // Infinite endpoints only arise for nonnegative quantities.
            debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
            return Real { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi };
        }
        let corners = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = corners.iter().min().unwrap().clone();
        let hi = corners.iter().max().unwrap().clone();
        Real { lo, hi }
    }

    pub fn scale(&self, q: &Rational) -> Real {
        self.mul(&Real::from_rational(q.clone()))
    }

    /// Quotient of a nonnegative enclosure by a positive one.
    pub fn div(&self, other: &Real) -> Real {
        assert!(!self.lo.is_negative() && !other.lo.is_negative(), "nonnegative division only");
        let lo = match &other.hi {
            ExtScalar::Infinite => ExtScalar::zero(),
            ExtScalar::Finite(d) if d.is_zero() => ExtScalar::Infinite,
            ExtScalar::Finite(d) => match &self.lo {
                ExtScalar::Finite(n) => ExtScalar::Finite(n / d),
                ExtScalar::Infinite => ExtScalar::Infinite,
            },
        };
        let hi = match &other.lo {
            ExtScalar::Finite(d) if d.is_zero() => {
                if self.hi.is_zero() {
                    ExtScalar::zero()
                } else {
                    ExtScalar::Infinite
                }
            }
            ExtScalar::Finite(d) => match &self.hi {
                ExtScalar::Finite(n) => ExtScalar::Finite(n / d),
                ExtScalar::Infinite => ExtScalar::Infinite,
            },
            ExtScalar::Infinite => ExtScalar::zero(),
        };
        Real { lo, hi }
    }

    /// Nonnegative enclosure raised to a rational power.
    pub fn pow(&self, exponent: &Rational) -> Real {
        assert!(!self.lo.is_negative(), "powers of negative enclosures");
        if exponent.is_zero() {
            return Real::one();
        }
        let raise = |x: &ExtScalar| -> Real {
            match x {
                ExtScalar::Finite(q) => pow_rational(q, exponent),
                ExtScalar::Infinite if exponent.is_positive() => Real::infinity(),
                ExtScalar::Infinite => Real::zero(),
            }
        };
        let a = raise(&self.lo);
        let b = raise(&self.hi);
        if exponent.is_positive() {
            Real { lo: a.lo, hi: b.hi }
        } else {
            Real { lo: b.lo, hi: a.hi }
        }
    }

    pub fn max(&self, other: &Real) -> Real {
        Real { lo: self.lo.clone().max(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Real>) -> Real {
        items.into_iter().fold(Real::zero(), |acc, x| acc.add(x))
    }
}

impl From<ExtScalar> for Real {
    fn from(x: ExtScalar) -> Self {
        Real::exact(x)
    }
}

impl From<Rational> for Real {
    fn from(q: Rational) -> Self {
        Real::from_rational(q)
    }
}

/// `x^e` for rational `x ≥ 0` and rational `e`; exact when the result is rational.
pub fn pow_rational(x: &Rational, e: &Rational) -> Real {
    assert!(!x.is_negative(), "negative base {}", format_rational(x));
    if e.is_zero() {
        return Real::one();
    }
    if x.is_zero() {
        return if e.is_positive() { Real::zero() } else { Real::infinity() };
    }
    let a = e.numer().abs().to_usize().expect("exponent numerator fits in usize");
    let b = e.denom().to_u32().expect("exponent denominator fits in u32");
    let mut y = num_traits::pow(x.clone(), a);
    if e.is_negative() {
        y = y.recip();
    }
    root(&y, b)
}

/// `y^(1/b)` for rational `y > 0`.
pub fn root(y: &Rational, b: u32) -> Real {
    if b == 1 {
        return Real::from_rational(y.clone());
    }
    let n = y.numer();
    let d = y.denom();
    let rn = n.nth_root(b);
    let rd = d.nth_root(b);
    if num_traits::pow(rn.clone(), b as usize) == *n && num_traits::pow(rd.clone(), b as usize) == *d {
        return Real::from_rational(Rational::new(rn, rd));
    }
    // floor(y^(1/b) · 2^k) with at least ROOT_BITS significant bits.
    let log2_y = n.bits() as i64 - d.bits() as i64;
    let k = (ROOT_BITS as i64 + 2 + (-log2_y).max(0) / b as i64 + 1).max(0) as usize;
    let scaled = (n << (k * b as usize)) / d;
    let r = scaled.nth_root(b);
    let denom = BigInt::one() << k;
    let lo = Rational::new(r.clone(), denom.clone());
    let hi = Rational::new(r + 1, denom);
    Real::between(ExtScalar::Finite(lo), ExtScalar::Finite(hi))
}

/// Natural logarithm of a positive rational.
pub fn ln(x: &Rational) -> Real {
    assert!(x.is_positive(), "ln of nonpositive value");
    if x.is_one() {
        return Real::zero();
    }
    if x < &Rational::one() {
        let pos = ln(&x.recip());
        return Real { lo: negate(&pos.hi), hi: negate(&pos.lo) };
    }
    // x = m · 2^k with 1 ≤ m < 2.
    let mut k = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = int(2);
    let mut m = x / num_traits::pow(two.clone(), k.max(0) as usize);
    while m >= two {
        m /= &two;
        k += 1;
    }
    while m < Rational::one() {
        m *= &two;
        k -= 1;
    }
    let ln_m = atanh_series(&((&m - Rational::one()) / (&m + Rational::one())));
    let ln2 = atanh_series(&Rational::new(BigInt::one(), BigInt::from(3)));
    let (mid, err) = (
        &ln_m.0 * int(2) + &ln2.0 * int(2 * k),
        &ln_m.1 * int(2) + &ln2.1 * int(2 * k.abs()),
    );
    Real::between(ExtScalar::Finite(&mid - &err), ExtScalar::Finite(&mid + &err))
}

fn negate(x: &ExtScalar) -> ExtScalar {
    ExtScalar::Finite(-x.expect_finite("logarithm"))
}

/// `atanh(z)` for `0 ≤ z ≤ 1/3`, returned as `(value, error bound)`.
fn atanh_series(z: &Rational) -> (Rational, Rational) {
    let scale = BigInt::one() << LOG_BITS;
    let z_fp: BigInt = (z * Rational::from_integer(scale.clone())).floor().to_integer();
    let z2 = (&z_fp * &z_fp) >> LOG_BITS;
    let mut power = z_fp;
    let mut sum = BigInt::zero();
    let mut terms = 0i64;
    let mut j = 0u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * j + 1);
        power = (&power * &z2) >> LOG_BITS;
        j += 1;
        terms += 1;
    }
    // Truncation of z, per-term rounding (three roundings per term), and the
    // geometric tail after the power underflows one ulp.
    let ulp = Rational::new(BigInt::one(), scale.clone());
    let err = &ulp * int(4 * terms + 8);
    (Rational::new(sum, scale), err)
}

/// Scientific notation with `digits` significant digits (truncated toward zero).
pub fn format_decimal(q: &Rational, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let sign = if q.is_negative() { "-" } else { "" };
    let a = q.abs();
    let ten = BigInt::from(10);
    // Find e with 10^e ≤ a < 10^(e+1).
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let mantissa = (&a * pow10(digits as i64 - 1 - e)).floor().to_integer().to_string();
    let (head, tail) = mantissa.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            return write!(f, "{}", self.lo);
        }
        match (&self.lo, &self.hi) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => {
                write!(f, "[{}, {}]", format_decimal(a, 35), format_decimal(b, 35))
            }
            (ExtScalar::Finite(a), ExtScalar::Infinite) => write!(f, "[{}, inf]", format_decimal(a, 35)),
            _ => write!(f, "inf"),
        }
    }
}

/// Exact values serialize as a rational literal; enclosures as
/// `{"approx": <f64>, "lo": "...", "hi": "..."}` with decimal endpoints.
impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        if let Some(x) = self.exact_value() {
            return x.serialize(serializer);
        }
        let endpoint = |x: &ExtScalar| match x {
            ExtScalar::Finite(q) => format_decimal(q, 35),
            ExtScalar::Infinite => "inf".to_string(),
        };
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("approx", &self.to_f64())?;
        map.serialize_entry("lo", &endpoint(&self.lo))?;
        map.serialize_entry("hi", &endpoint(&self.hi))?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn contains(r: &Real, x: f64) -> bool {
        r.lo().to_f64() <= x + 1e-15 * x.abs() && x - 1e-15 * x.abs() <= r.hi().to_f64()
    }

    #[test]
    fn perfect_powers_are_exact() {
        assert_eq!(pow_rational(&rat(9, 4), &rat(1, 2)), Real::from_rational(rat(3, 2)));
        assert_eq!(pow_rational(&rat(8, 1), &rat(-2, 3)), Real::from_rational(rat(1, 4)));
        assert_eq!(pow_rational(&rat(0, 1), &rat(-1, 2)), Real::infinity());
        assert_eq!(pow_rational(&rat(5, 7), &int(3)), Real::from_rational(rat(125, 343)));
    }

    #[test]
    fn irrational_roots_are_tight_enclosures() {
        let r = pow_rational(&int(2), &rat(1, 2));
        assert!(!r.is_exact());
        assert!(r.relative_width() < 1e-39);
        assert!(contains(&r, std::f64::consts::SQRT_2));
        let lo = r.lo().finite().unwrap();
        let hi = r.hi().finite().unwrap();
        assert!(lo * lo < int(2) && hi * hi > int(2));

        let tiny = pow_rational(&rat(1, 1_000_000_007), &rat(1, 3));
        assert!(tiny.relative_width() < 1e-39);
    }

    #[test]
    fn logarithm_encloses_reference_values() {
        let l2 = ln(&int(2));
        assert!(contains(&l2, std::f64::consts::LN_2));
        assert!(l2.relative_width() < 1e-50);
        let l = ln(&rat(21, 20));
        assert!(contains(&l, (21.0f64 / 20.0).ln()));
        let neg = ln(&rat(1, 10));
        assert!(contains(&neg, (0.1f64).ln()));
        assert!(neg.hi().is_negative());
        assert_eq!(ln(&int(1)), Real::zero());
    }

    #[test]
    fn interval_ops() {
        let a = Real::between(ExtScalar::from(1), ExtScalar::from(2));
        let b = Real::between(ExtScalar::from(3), ExtScalar::from(4));
        assert_eq!(a.add(&b), Real::between(ExtScalar::from(4), ExtScalar::from(6)));
        assert_eq!(a.mul(&b), Real::between(ExtScalar::from(3), ExtScalar::from(8)));
        assert_eq!(b.sub(&a), Real::between(ExtScalar::from(1), ExtScalar::from(3)));
        assert_eq!(a.div(&b), Real::between(ExtScalar::ratio(1, 4), ExtScalar::ratio(2, 3)));
        assert!(a.certainly_le(&b));
        assert!(!b.possibly_le(&a));
        assert_eq!(Real::zero().mul(&Real::infinity()), Real::zero());
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(&rat(1, 3), 5), "3.3333e-1");
        assert_eq!(format_decimal(&int(1000), 3), "1.00e3");
        assert_eq!(format_decimal(&rat(-5, 1), 1), "-5e0");
    }
}
