//! Piecewise-constant nonnegative functions on an open interval.
//!
//! Values are attached to the open subintervals between consecutive
//! breakpoints; nothing is stored at the breakpoints themselves, so all
//! comparisons are almost-everywhere statements. Adjacent pieces with equal
//! values are always merged, which makes structural equality the same as
//! a.e. equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::{format_rational, ExtScalar, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StepFunction {
    domain: Interval,
    breaks: Vec<Rational>,
    values: Vec<ExtScalar>,
}

/// Two step functions written on their merged breakpoint set.
///
/// Unlike [`StepFunction`] this form is not canonical: neighbouring pieces
/// may carry equal values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub domain: Interval,
    pub breaks: Vec<Rational>,
    pub left: Vec<ExtScalar>,
    pub right: Vec<ExtScalar>,
}

impl Refinement {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn piece(&self, i: usize) -> Interval {
        piece_interval(&self.domain, &self.breaks, i)
    }

    pub fn left_function(&self) -> StepFunction {
        StepFunction::canonical(self.domain.clone(), self.breaks.clone(), self.left.clone())
    }

    pub fn right_function(&self) -> StepFunction {
        StepFunction::canonical(self.domain.clone(), self.breaks.clone(), self.right.clone())
    }
}

fn piece_interval(domain: &Interval, breaks: &[Rational], i: usize) -> Interval {
    let lower = if i == 0 { domain.lower().cloned() } else { Some(breaks[i - 1].clone()) };
    let upper = if i == breaks.len() { domain.upper().cloned() } else { Some(breaks[i].clone()) };
    Interval::new(lower, upper).expect("breakpoints are strictly increasing")
}

impl StepFunction {
    /// Validates and canonicalizes. Breakpoints must be strictly increasing and
    /// interior to `domain`; values must be nonnegative.
    pub fn new(domain: Interval, breaks: Vec<Rational>, values: Vec<ExtScalar>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        for w in breaks.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidStep(format!(
                    "breakpoints not strictly increasing at {}",
                    format_rational(&w[1])
                )));
            }
        }
        if let Some(b) = breaks.iter().find(|b| !domain.contains_interior(b)) {
            return Err(Error::InvalidStep(format!(
                "breakpoint {} is not interior to {domain}",
                format_rational(b)
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::InvalidStep(format!("negative value {v}")));
        }
        Ok(StepFunction::canonical(domain, breaks, values))
    }

    /// Merges equal neighbours. Callers guarantee the structural invariants.
    pub(crate) fn canonical(domain: Interval, breaks: Vec<Rational>, values: Vec<ExtScalar>) -> Self {
        debug_assert_eq!(values.len(), breaks.len() + 1);
        let mut out_breaks = Vec::with_capacity(breaks.len());
        let mut out_values = Vec::with_capacity(values.len());
        let mut values = values.into_iter();
        out_values.push(values.next().expect("at least one piece"));
        for (b, v) in breaks.into_iter().zip(values) {
            if out_values.last() != Some(&v) {
                out_breaks.push(b);
                out_values.push(v);
            }
        }
        StepFunction { domain, breaks: out_breaks, values: out_values }
    }

    pub fn constant(domain: Interval, value: ExtScalar) -> Self {
        assert!(!value.is_negative(), "step functions are nonnegative");
        StepFunction { domain, breaks: Vec::new(), values: vec![value] }
    }

    pub fn zero(domain: Interval) -> Self {
        StepFunction::constant(domain, ExtScalar::zero())
    }

    /// Builds from consecutive segments `(value, right end)` starting at the
    /// domain's lower endpoint. A right end of `None` means the domain's upper
    /// endpoint and must come last. Empty segments are skipped.
    pub fn from_segments(domain: Interval, segments: Vec<(ExtScalar, Option<Rational>)>) -> Result<Self> {
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        let mut cursor = domain.lower().cloned();
        let mut reached_end = false;
        for (value, end) in segments {
            let at_domain_end = match (&end, domain.upper()) {
                (None, _) => true,
                (Some(e), Some(u)) => e == u,
                (Some(_), None) => false,
            };
            if at_domain_end {
                values.push(value);
                reached_end = true;
                break;
            }
            let end = end.expect("checked above");
            if cursor.as_ref().is_some_and(|c| c >= &end) {
                continue;
            }
            values.push(value);
            breaks.push(end.clone());
            cursor = Some(end);
        }
        if !reached_end {
            return Err(Error::InvalidStep("segments do not reach the end of the domain".into()));
        }
        StepFunction::new(domain, breaks, values)
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn values(&self) -> &[ExtScalar] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    pub fn piece(&self, i: usize) -> Interval {
        piece_interval(&self.domain, &self.breaks, i)
    }

    pub fn pieces(&self) -> impl Iterator<Item = (Interval, &ExtScalar)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.piece(i), v))
    }

    /// Value on the piece containing `x`; at a breakpoint the right piece wins.
    pub fn value_at(&self, x: &Rational) -> &ExtScalar {
        let idx = self.breaks.partition_point(|b| b <= x);
        &self.values[idx]
    }

    pub fn is_finite_valued(&self) -> bool {
        self.values.iter().all(ExtScalar::is_finite)
    }

    pub fn max_value(&self) -> &ExtScalar {
        self.values.iter().max().expect("nonempty")
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_zero(&self) -> bool {
        self.values.len() == 1 && self.values[0].is_zero()
    }

    /// Applies `op` to every value.
    pub fn map(&self, op: impl Fn(&ExtScalar) -> ExtScalar) -> StepFunction {
        let values: Vec<_> = self.values.iter().map(op).collect();
        assert!(values.iter().all(|v| !v.is_negative()), "mapped values must stay nonnegative");
        StepFunction::canonical(self.domain.clone(), self.breaks.clone(), values)
    }

    /// Restriction to a subinterval of the domain.
    pub fn restrict(&self, sub: &Interval) -> Result<StepFunction> {
        if !self.domain.contains_interval(sub) {
            return Err(Error::DomainMismatch(self.domain.clone(), sub.clone()));
        }
        let first = match sub.lower() {
            Some(a) => self.breaks.partition_point(|b| b <= a),
            None => 0,
        };
        let last = match sub.upper() {
            Some(c) => self.breaks.partition_point(|b| b < c),
            None => self.breaks.len(),
        };
        let breaks = self.breaks[first..last].to_vec();
        let values = self.values[first..=last].to_vec();
        Ok(StepFunction::canonical(sub.clone(), breaks, values))
    }

    /// `x ↦ f(x + delta)` on the translated domain.
    pub fn shifted(&self, delta: &Rational) -> StepFunction {
        let domain = Interval::new(self.domain.lower().map(|a| a - delta), self.domain.upper().map(|b| b - delta))
            .expect("translation keeps order");
        StepFunction {
            domain,
            breaks: self.breaks.iter().map(|b| b - delta).collect(),
            values: self.values.clone(),
        }
    }

    /// Extends to a larger domain, filling the new region with `fill`.
    pub fn extend_to(&self, domain: &Interval, fill: ExtScalar) -> Result<StepFunction> {
        if !domain.contains_interval(&self.domain) {
            return Err(Error::DomainMismatch(self.domain.clone(), domain.clone()));
        }
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        if self.domain.lower() != domain.lower() {
            values.push(fill.clone());
            breaks.push(self.domain.lower().expect("strictly inside").clone());
        }
        values.extend(self.values.iter().cloned());
        breaks.extend(self.breaks.iter().cloned());
        if self.domain.upper() != domain.upper() {
            breaks.push(self.domain.upper().expect("strictly inside").clone());
            values.push(fill);
        }
        Ok(StepFunction::canonical(domain.clone(), breaks, values))
    }

    /// Pointwise combination on the common refinement.
    pub fn zip_with(
        &self,
        other: &StepFunction,
        op: impl Fn(&ExtScalar, &ExtScalar) -> ExtScalar,
    ) -> Result<StepFunction> {
        let r = refine(self, other)?;
        let values: Vec<_> = r.left.iter().zip(&r.right).map(|(a, b)| op(a, b)).collect();
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(Error::InvalidStep(format!("combination produced negative value {v}")));
        }
        Ok(StepFunction::canonical(r.domain, r.breaks, values))
    }

    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Values raised to an integer power.
    pub fn powi(&self, exp: u32) -> StepFunction {
        self.map(|v| v.powi(exp))
    }

    /// `self ≤ other` a.e. on a shared domain.
    pub fn le_everywhere(&self, other: &StepFunction) -> Result<bool> {
        let r = refine(self, other)?;
        Ok(r.left.iter().zip(&r.right).all(|(a, b)| a <= b))
    }
}

/// Re-expresses both functions on the union of their breakpoints.
pub fn refine(f: &StepFunction, g: &StepFunction) -> Result<Refinement> {
    if f.domain != g.domain {
        return Err(Error::DomainMismatch(f.domain.clone(), g.domain.clone()));
    }
    let mut breaks = Vec::with_capacity(f.breaks.len() + g.breaks.len());
    let mut left = Vec::with_capacity(breaks.capacity() + 1);
    let mut right = Vec::with_capacity(breaks.capacity() + 1);
    let (mut i, mut j) = (0, 0);
    loop {
        left.push(f.values[i].clone());
        right.push(g.values[j].clone());
        let next_f = f.breaks.get(i);
        let next_g = g.breaks.get(j);
        match (next_f, next_g) {
            (None, None) => break,
            (Some(a), None) => {
                breaks.push(a.clone());
                i += 1;
            }
            (None, Some(b)) => {
                breaks.push(b.clone());
                j += 1;
            }
            (Some(a), Some(b)) => match a.cmp(b) {
                std::cmp::Ordering::Less => {
                    breaks.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    breaks.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    breaks.push(a.clone());
                    i += 1;
                    j += 1;
                }
            },
        }
    }
    Ok(Refinement { domain: f.domain.clone(), breaks, left, right })
}

impl fmt::Display for StepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRepr {
    domain: Interval,
    breaks: Vec<ExtScalar>,
    values: Vec<ExtScalar>,
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepRepr {
            domain: self.domain.clone(),
            breaks: self.breaks.iter().cloned().map(ExtScalar::Finite).collect(),
            values: self.values.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StepRepr::deserialize(deserializer)?;
        let breaks = repr
            .breaks
            .into_iter()
            .map(|b| match b {
                ExtScalar::Finite(q) => Ok(q),
                ExtScalar::Infinite => Err(serde::de::Error::custom("breakpoints must be finite")),
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        StepFunction::new(repr.domain, breaks, repr.values).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn unit() -> Interval {
        Interval::bounded(int(0), int(3)).unwrap()
    }

    fn sf(breaks: &[i64], values: &[i64]) -> StepFunction {
        StepFunction::new(
            unit(),
            breaks.iter().map(|&b| int(b)).collect(),
            values.iter().map(|&v| ExtScalar::from(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn merges_equal_neighbours() {
        let f = sf(&[1, 2], &[5, 5, 7]);
        assert_eq!(f.breaks(), &[int(2)]);
        assert_eq!(f.values(), &[ExtScalar::from(5), ExtScalar::from(7)]);
    }

    #[test]
    fn validation_errors() {
        assert!(StepFunction::new(unit(), vec![int(2), int(1)], vec![ExtScalar::zero(); 3]).is_err());
        assert!(StepFunction::new(unit(), vec![int(3)], vec![ExtScalar::zero(); 2]).is_err());
        assert!(StepFunction::new(unit(), vec![], vec![ExtScalar::from(-1)]).is_err());
        assert!(StepFunction::new(unit(), vec![int(1)], vec![ExtScalar::zero()]).is_err());
    }

    #[test]
    fn refine_merges_partitions() {
        let f = sf(&[1], &[1, 2]);
        let g = sf(&[2], &[3, 4]);
        let r = refine(&f, &g).unwrap();
        assert_eq!(r.breaks, vec![int(1), int(2)]);
        assert_eq!(r.left_function(), f);
        assert_eq!(r.right_function(), g);

        let same = refine(&f, &f).unwrap();
        assert_eq!(same.breaks, f.breaks().to_vec());

        let c = sf(&[], &[9]);
        let r = refine(&c, &g).unwrap();
        assert_eq!(r.breaks, g.breaks().to_vec());
        assert_eq!(r.left, vec![ExtScalar::from(9); 2]);
    }

    #[test]
    fn refine_rejects_domain_mismatch() {
        let f = sf(&[], &[1]);
        let g = StepFunction::zero(Interval::half_line());
        assert!(matches!(refine(&f, &g), Err(Error::DomainMismatch(..))));
    }

    #[test]
    fn from_segments_and_restrict() {
        let f = StepFunction::from_segments(
            Interval::half_line(),
            vec![(ExtScalar::from(3), Some(rat(1, 2))), (ExtScalar::from(1), Some(int(2))), (ExtScalar::zero(), None)],
        )
        .unwrap();
        assert_eq!(f.breaks(), &[rat(1, 2), int(2)]);
        let r = f.restrict(&Interval::bounded(int(1), int(5)).unwrap()).unwrap();
        assert_eq!(r.breaks(), &[int(2)]);
        assert_eq!(r.values(), &[ExtScalar::from(1), ExtScalar::zero()]);
        assert_eq!(*f.value_at(&rat(1, 4)), ExtScalar::from(3));
        assert_eq!(*f.value_at(&int(2)), ExtScalar::zero());
    }

    #[test]
    fn extend_then_restrict_is_identity() {
        let f = sf(&[1], &[1, 2]);
        let big = f.extend_to(&Interval::real_line(), ExtScalar::zero()).unwrap();
        assert_eq!(big.breaks(), &[int(0), int(1), int(3)]);
        assert_eq!(big.restrict(&unit()).unwrap(), f);
    }

    #[test]
    fn serde_round_trip_example() {
        let f = sf(&[1, 2], &[1, 0, 2]);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"domain":["0","3"],"breaks":["1","2"],"values":["1","0","2"]}"#);
        assert_eq!(serde_json::from_str::<StepFunction>(&text).unwrap(), f);
    }
}
