//! A floating-point brute-force engine for differential testing.
//!
//! Nothing here calls the exact machinery: step functions are only read for
//! their breakpoints and values, then resampled on a grid and sorted.

use num_traits::{One, Signed, Zero};

use crate::embedding::TwoMeasures;
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

fn ext_f64(x: &ExtScalar) -> f64 {
    match x {
        ExtScalar::Finite(q) => rational_to_f64(q),
        ExtScalar::Infinite => f64::INFINITY,
    }
}

/// `a·b` with `0·∞ = 0`.
fn times(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn sample(f: &StepFunction, x: f64) -> f64 {
    let i = f.breaks().iter().take_while(|b| rational_to_f64(b) <= x).count();
    ext_f64(&f.values()[i])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub lo: f64,
    pub hi: f64,
    /// Values of the sampled functions, in input order.
    pub values: Vec<f64>,
}

impl GridCell {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Cells aligned with every breakpoint of the sampled functions. Unbounded
/// ends become a single cell of infinite length, on which every step function
/// is constant.
#[derive(Clone, Debug, PartialEq)]
pub struct GridModel {
    pub cells: Vec<GridCell>,
}

impl GridModel {
    pub fn new(functions: &[&StepFunction], n: usize) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(Error::Unsupported("no functions to sample".into()));
        };
        if let Some(other) = functions.iter().find(|f| f.domain() != first.domain()) {
            return Err(Error::DomainMismatch(first.domain().clone(), other.domain().clone()));
        }
        let mut breaks: Vec<f64> = functions.iter().flat_map(|f| f.breaks().iter().map(rational_to_f64)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let lower = first.domain().lower().map(rational_to_f64);
        let upper = first.domain().upper().map(rational_to_f64);
        let anchor_lo = breaks.first().copied().or(lower).or(upper).unwrap_or(0.0);
        let anchor_hi = breaks.last().copied().or(upper).or(lower).unwrap_or(0.0);
        let margin = (anchor_hi - anchor_lo).max(1.0);
        let window_lo = lower.unwrap_or(anchor_lo - margin);
        let window_hi = upper.unwrap_or(anchor_hi + margin);
        let mut points = vec![window_lo];
        points.extend(breaks.iter().copied().filter(|b| *b > window_lo && *b < window_hi));
        points.push(window_hi);
        let span = window_hi - window_lo;
        let mut edges = Vec::new();
        for w in points.windows(2) {
            let count = ((n as f64) * (w[1] - w[0]) / span).round().max(1.0) as usize;
            for k in 0..count {
                edges.push(w[0] + (w[1] - w[0]) * (k as f64) / (count as f64));
            }
        }
        edges.push(window_hi);
        let mut bounds: Vec<(f64, f64)> = Vec::new();
        if lower.is_none() {
            bounds.push((f64::NEG_INFINITY, window_lo));
        }
        bounds.extend(edges.windows(2).map(|w| (w[0], w[1])));
        if upper.is_none() {
            bounds.push((window_hi, f64::INFINITY));
        }
        let cells = bounds
            .into_iter()
            .map(|(lo, hi)| {
                let mid = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (false, _) => hi - 1.0,
                    (_, false) => lo + 1.0,
                };
                GridCell { lo, hi, values: functions.iter().map(|f| sample(f, mid)).collect() }
            })
            .collect();
        Ok(GridModel { cells })
    }
}

/// A nonincreasing step array: `values[i]` on `(ends[i−1], ends[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRearrangement {
    pub ends: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridRearrangement {
    pub fn total(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.ends.partition_point(|e| *e <= t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫_0^b f*(t)^p w(t) dt` for a weight sampled on a half-line grid.
    pub fn weighted_integral(&self, p: f64, weight: &StepFunction, b: f64) -> f64 {
        let mut cuts: Vec<f64> = self.ends.iter().copied().filter(|e| *e < b).collect();
        cuts.extend(weight.breaks().iter().map(rational_to_f64).filter(|x| *x < b && *x > 0.0));
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        // Accumulated cell ends drift from exact breakpoints by rounding; merge
        // cuts that differ only by that drift so no sliver cell is sampled.
        let mut snapped: Vec<f64> = Vec::with_capacity(cuts.len());
        for c in cuts {
            match snapped.last() {
                Some(&last) if c.is_finite() && c - last <= 1e-12 * c.abs().max(1.0) => {}
                _ => snapped.push(c),
            }
        }
        let cuts = snapped;
        let mut total = 0.0;
        let mut prev = 0.0;
        for c in cuts {
            if c <= prev {
                continue;
            }
            let probe = if c.is_finite() { 0.5 * (prev + c) } else { prev + 1.0 };
            let value = self.eval(probe);
            if value != 0.0 {
                total += times(times(value.powf(p), sample(weight, probe)), c - prev);
            }
            prev = c;
        }
        total
    }
}

/// Sorts grid cells by value, largest first, and accumulates their `μ`-mass.
pub fn grid_rearrange(f: &StepFunction, space: &WeightedSpace, n: usize) -> Result<GridRearrangement> {
    let grid = GridModel::new(&[f, space.density()], n)?;
    let mut cells: Vec<(f64, f64)> = grid
        .cells
        .iter()
        .map(|c| (c.values[0], times(c.values[1], c.length())))
        .filter(|(_, m)| *m > 0.0)
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut ends = Vec::with_capacity(cells.len());
    let mut values = Vec::with_capacity(cells.len());
    let mut acc = 0.0;
    for (v, m) in cells {
        acc += m;
        ends.push(acc);
        values.push(v);
    }
    Ok(GridRearrangement { ends, values })
}

/// `μ{f > s}`.
pub fn grid_distribution(f: &StepFunction, space: &WeightedSpace, s: f64, n: usize) -> Result<f64> {
    let grid = GridModel::new(&[f, space.density()], n)?;
    Ok(grid.cells.iter().filter(|c| c.values[0] > s).map(|c| times(c.values[1], c.length())).sum())
}

/// `∫_0^{min(μ(R),1)} f*`.
pub fn grid_l1_plus_linf(f: &StepFunction, space: &WeightedSpace, n: usize) -> Result<f64> {
    let r = grid_rearrange(f, space, n)?;
    let b = r.total().min(1.0);
    let mut total = 0.0;
    let mut prev = 0.0;
    for (end, value) in r.ends.iter().zip(&r.values) {
        if prev >= b {
            break;
        }
        total += times(*value, end.min(b) - prev);
        prev = *end;
    }
    Ok(total)
}

/// `∫ f*^p w dt`.
pub fn grid_lambda_integral(
    f: &StepFunction,
    space: &WeightedSpace,
    weight: &StepFunction,
    p: f64,
    n: usize,
) -> Result<f64> {
    let r = grid_rearrange(f, space, n)?;
    Ok(r.weighted_integral(p, weight, r.total()))
}

/// `∫ f^p v dμ`.
pub fn grid_weighted_lp(f: &StepFunction, space: &WeightedSpace, v: &StepFunction, p: f64, n: usize) -> Result<f64> {
    let grid = GridModel::new(&[f, v, space.density()], n)?;
    Ok(grid
        .cells
        .iter()
        .filter(|c| c.values[0] != 0.0)
        .map(|c| times(times(c.values[0].powf(p), c.values[1]), times(c.values[2], c.length())))
        .sum())
}

/// The best `∫_E (dμ/dν)^{1/(p−1)} dμ` over `μ(E) = min(μ(R), 1)`, filled
/// greedily cell by cell; returns that value to the power `1/p'`. For `p = 1`
/// returns the largest ratio on a set of positive measure.
pub fn bathtub_search(m: &TwoMeasures, p: f64, n: usize) -> Result<f64> {
    let grid = GridModel::new(&[m.w_mu(), m.w_nu()], n)?;
    let mut cells: Vec<(f64, f64)> = grid
        .cells
        .iter()
        .map(|c| {
            let (a, b) = (c.values[0], c.values[1]);
            let ratio = if b == 0.0 { 0.0 } else { a / b };
            (ratio, times(a, c.length()))
        })
        .filter(|(_, mass)| *mass > 0.0)
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    if p == 1.0 {
        return Ok(cells.first().map_or(0.0, |c| c.0));
    }
    let gamma = 1.0 / (p - 1.0);
    let mut budget = cells.iter().map(|c| c.1).sum::<f64>().min(1.0);
    let mut value = 0.0;
    for (ratio, mass) in cells {
        if budget <= 0.0 {
            break;
        }
        let take = mass.min(budget);
        value += times(ratio.powf(gamma), take);
        budget -= take;
    }
    Ok(value.powf(1.0 - 1.0 / p))
}

/// The bathtub value `∫ h dμ` over the greedy set in exact arithmetic, when
/// `1/(p−1)` is a positive integer so that `h` stays rational.
pub fn exact_bathtub(m: &TwoMeasures, p: &Rational) -> Option<Rational> {
    if p <= &Rational::one() {
        return None;
    }
    let gamma = (p - Rational::one()).recip();
    if !gamma.is_integer() {
        return None;
    }
    let k = gamma.to_integer().to_string().parse::<usize>().ok()?;
    let (a, b) = (m.w_mu(), m.w_nu());
    let mut cuts: Vec<Rational> = a.breaks().iter().chain(b.breaks()).cloned().collect();
    cuts.sort();
    cuts.dedup();
    let lower = a.domain().lower().cloned();
    let upper = a.domain().upper().cloned();
    let mut bounds: Vec<Option<Rational>> = vec![lower];
    bounds.extend(cuts.into_iter().map(Some));
    bounds.push(upper);
    let value_on = |f: &StepFunction, lo: &Option<Rational>, hi: &Option<Rational>| -> ExtScalar {
        let idx = match (lo, hi) {
            (Some(x), _) => f.breaks().iter().take_while(|b| *b <= x).count(),
            (None, _) => 0,
        };
        f.values()[idx].clone()
    };
    let mut cells: Vec<(Rational, Option<Rational>)> = Vec::new();
    for w in bounds.windows(2) {
        let ExtScalar::Finite(da) = value_on(a, &w[0], &w[1]) else { return None };
        let ExtScalar::Finite(db) = value_on(b, &w[0], &w[1]) else { return None };
        if da.is_zero() {
            continue;
        }
        let ratio = if db.is_zero() { Rational::zero() } else { &da / &db };
        let mass = match (&w[0], &w[1]) {
            (Some(x), Some(y)) => Some((y - x) * &da),
            _ => None,
        };
        cells.push((ratio, mass));
    }
    cells.sort_by(|x, y| y.0.cmp(&x.0));
    let mut budget = Rational::one();
    let total: Option<Rational> = cells.iter().map(|c| c.1.clone()).sum();
    if let Some(t) = total {
        budget = budget.min(t);
    }
    let mut value = Rational::zero();
    for (ratio, mass) in cells {
        if !budget.is_positive() {
            break;
        }
        let take = match mass {
            Some(mass) => mass.min(budget.clone()),
            None => budget.clone(),
        };
        value += num_traits::pow(ratio, k) * &take;
        budget -= take;
    }
    Some(value)
}

/// `|a − b| ≤ tol·max(|a|, |b|)`, with equal infinities accepted.
pub fn agrees(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::scalar::{int, rat};

    #[test]
    fn grid_rearrangement_of_two_pieces() {
        let dom = Interval::bounded(int(0), int(1)).unwrap();
        let f = StepFunction::new(dom.clone(), vec![rat(1, 2)], vec![1.into(), 3.into()]).unwrap();
        let r = grid_rearrange(&f, &WeightedSpace::lebesgue(dom.clone()), 10_000).unwrap();
        assert_eq!(r.eval(0.25), 3.0);
        assert_eq!(r.eval(0.75), 1.0);
        let jump = r.values.iter().position(|v| *v == 1.0).unwrap();
        assert!((r.ends[jump - 1] - 0.5).abs() < 1e-4);
        let zero = grid_rearrange(&StepFunction::zero(dom.clone()), &WeightedSpace::lebesgue(dom), 100).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unbounded_norms() {
        let half = Interval::half_line();
        let space = WeightedSpace::lebesgue(half.clone());
        let f = StepFunction::new(half.clone(), vec![int(1), int(3)], vec![5.into(), 2.into(), 0.into()]).unwrap();
        assert!(agrees(grid_l1_plus_linf(&f, &space, 1000).unwrap(), 5.0, 1e-12));
        let one = StepFunction::constant(half.clone(), 1.into());
        assert!(agrees(grid_weighted_lp(&f, &space, &one, 2.0, 1000).unwrap(), 33.0, 1e-12));
        assert!(agrees(grid_lambda_integral(&f, &space, &one, 2.0, 1000).unwrap(), 33.0, 1e-12));
        assert_eq!(grid_distribution(&f, &space, 1.0, 1000).unwrap(), 3.0);
        assert_eq!(grid_l1_plus_linf(&one, &space, 10).unwrap(), 1.0);
    }

    #[test]
    fn bathtub_examples() {
        let dom = Interval::half_line();
        let same = TwoMeasures::new(
            StepFunction::constant(dom.clone(), 1.into()),
            StepFunction::constant(dom.clone(), 1.into()),
        )
        .unwrap();
        assert!(agrees(bathtub_search(&same, 2.0, 100).unwrap(), 1.0, 1e-12));
        assert_eq!(exact_bathtub(&same, &int(2)), Some(int(1)));
        let small = Interval::bounded(int(0), rat(1, 4)).unwrap();
        let finite = TwoMeasures::new(
            StepFunction::constant(small.clone(), 1.into()),
            StepFunction::constant(small, 1.into()),
        )
        .unwrap();
        assert!(agrees(bathtub_search(&finite, 2.0, 100).unwrap(), 0.5, 1e-15));
        assert_eq!(exact_bathtub(&finite, &int(2)), Some(rat(1, 4)));
        let two_level = TwoMeasures::new(
            StepFunction::constant(dom.clone(), 1.into()),
            StepFunction::new(dom, vec![int(1)], vec![4.into(), 1.into()]).unwrap(),
        )
        .unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert!(agrees(bathtub_search(&two_level, p, 1000).unwrap(), 1.0, 1e-9));
        }
        assert_eq!(bathtub_search(&two_level, 1.0, 10).unwrap(), 1.0);
        assert_eq!(exact_bathtub(&two_level, &rat(3, 2)), Some(int(1)));
        assert_eq!(exact_bathtub(&two_level, &int(3)), None);
    }
}
