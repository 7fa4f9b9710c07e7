//! Open intervals with rational or infinite endpoints.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, ExtScalar, Rational};

/// Open interval `(lower, upper)`; `None` stands for `-∞` below and `+∞` above.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lower: Option<Rational>,
    upper: Option<Rational>,
}

impl Interval {
    pub fn new(lower: Option<Rational>, upper: Option<Rational>) -> Result<Self> {
        if let (Some(a), Some(b)) = (&lower, &upper) {
            if a >= b {
                return Err(Error::InvalidInterval(format!(
                    "lower endpoint {} is not below upper endpoint {}",
                    format_rational(a),
                    format_rational(b)
                )));
            }
        }
        Ok(Interval { lower, upper })
    }

    pub fn bounded(lower: Rational, upper: Rational) -> Result<Self> {
        Interval::new(Some(lower), Some(upper))
    }

    /// `(0, end)` with `end` possibly infinite. Fails for `end <= 0`.
    pub fn from_zero(end: &ExtScalar) -> Result<Self> {
        match end {
            ExtScalar::Finite(e) => Interval::new(Some(Rational::zero()), Some(e.clone())),
            ExtScalar::Infinite => Ok(Interval::half_line()),
        }
    }

    /// `(0, ∞)`.
    pub fn half_line() -> Self {
        Interval { lower: Some(Rational::zero()), upper: None }
    }

    /// `(-∞, ∞)`.
    pub fn real_line() -> Self {
        Interval { lower: None, upper: None }
    }

    pub fn lower(&self) -> Option<&Rational> {
        self.lower.as_ref()
    }

    pub fn upper(&self) -> Option<&Rational> {
        self.upper.as_ref()
    }

    pub fn length(&self) -> ExtScalar {
        match (&self.lower, &self.upper) {
            (Some(a), Some(b)) => ExtScalar::Finite(b - a),
            _ => ExtScalar::Infinite,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    /// Whether `x` lies strictly inside.
    pub fn contains_interior(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|a| a < x) && self.upper.as_ref().is_none_or(|b| x < b)
    }

    /// Whether `other ⊆ self`.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lower_ok = match (&self.lower, &other.lower) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(c)) => a <= c,
        };
        let upper_ok = match (&self.upper, &other.upper) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(b), Some(d)) => d <= b,
        };
        lower_ok && upper_ok
    }

    /// Intersection, `None` when empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = match (&self.lower, &other.lower) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(c)) => Some(a.max(c).clone()),
        };
        let upper = match (&self.upper, &other.upper) {
            (None, x) | (x, None) => x.clone(),
            (Some(b), Some(d)) => Some(b.min(d).clone()),
        };
        Interval::new(lower, upper).ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lower.as_ref().map_or("-inf".to_string(), format_rational);
        let hi = self.upper.as_ref().map_or("inf".to_string(), format_rational);
        write!(f, "({lo}, {hi})")
    }
}

/// Endpoint text: a rational literal, `-inf` (lower only) or `inf` (upper only).
pub fn parse_endpoint(text: &str, is_lower: bool) -> Result<Option<Rational>> {
    match (text, is_lower) {
        ("-inf", true) | ("inf", false) => Ok(None),
        ("-inf", false) | ("inf", true) => Err(Error::Parse(format!(
            "endpoint {text:?} not allowed as {} endpoint",
            if is_lower { "lower" } else { "upper" }
        ))),
        _ => parse_rational(text).map(Some),
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let lo = self.lower.as_ref().map_or("-inf".to_string(), format_rational);
        let hi = self.upper.as_ref().map_or("inf".to_string(), format_rational);
        [lo, hi].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[String; 2]>::deserialize(deserializer)?;
        let lower = parse_endpoint(&lo, true).map_err(serde::de::Error::custom)?;
        let upper = parse_endpoint(&hi, false).map_err(serde::de::Error::custom)?;
        Interval::new(lower, upper).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn rejects_empty() {
        assert!(Interval::bounded(int(1), int(1)).is_err());
        assert!(Interval::bounded(int(2), int(1)).is_err());
    }

    #[test]
    fn length_and_containment() {
        let i = Interval::bounded(int(0), int(3)).unwrap();
        assert_eq!(i.length(), ExtScalar::from(3));
        assert_eq!(Interval::half_line().length(), ExtScalar::Infinite);
        assert!(Interval::half_line().contains_interval(&i));
        assert!(!i.contains_interval(&Interval::half_line()));
        assert!(i.contains_interior(&int(1)));
        assert!(!i.contains_interior(&int(0)));
    }

    #[test]
    fn intersection() {
        let a = Interval::new(None, Some(int(2))).unwrap();
        let b = Interval::half_line();
        assert_eq!(a.intersect(&b).unwrap(), Interval::bounded(int(0), int(2)).unwrap());
        let c = Interval::bounded(int(5), int(6)).unwrap();
        assert!(a.intersect(&c).is_none());
    }

    #[test]
    fn serde_shape() {
        let a = Interval::new(None, Some(int(2))).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text, r#"["-inf","2"]"#);
        assert_eq!(serde_json::from_str::<Interval>(&text).unwrap(), a);
        assert!(serde_json::from_str::<Interval>(r#"["inf","2"]"#).is_err());
    }
}
