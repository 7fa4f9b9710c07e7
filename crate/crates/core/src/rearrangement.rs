//! Distribution functions and the two rearrangements of a step function.
//!
//! Everything is computed by exact level-set accounting: the pieces of `f`
//! are grouped by value and their `μ`-measures summed. For `f ≥ 0` on `(R, μ)`:
//!
//! * `μ_f(s) = μ{f > s}` and `κ_f(s) = μ{f < s}` on `(0, ∞)`,
//! * `f*(t) = inf{s > 0 : μ_f(s) ≤ t}` on `(0, μ(R))`,
//! * `f_*(t) = sup{s > 0 : κ_f(s) < t}` on `(0, ∞)`.
//!
//! Besides the direct constructions the module exposes the alternative
//! formulas (inversion of `μ_f`, the infimum and measure forms of `f_*`) so
//! their agreement can be checked exactly.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::{ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::{refine, StepFunction};

/// A value of `f` together with `μ{f = value}` (always positive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    pub value: ExtScalar,
    pub measure: ExtScalar,
}

/// The `μ`-non-null level sets of a step function, in increasing value order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelProfile {
    levels: Vec<Level>,
}

/// A piece of the common refinement of `f` and the density.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasuredPiece {
    pub interval: Interval,
    pub value: ExtScalar,
    pub density: Rational,
    pub measure: ExtScalar,
}

/// Splits the domain into pieces on which both `f` and the density are constant.
pub fn measured_pieces(f: &StepFunction, space: &WeightedSpace) -> Result<Vec<MeasuredPiece>> {
    if f.domain() != space.domain() {
        return Err(Error::DomainMismatch(f.domain().clone(), space.domain().clone()));
    }
    let r = refine(f, space.density())?;
    Ok((0..r.len())
        .map(|i| {
            let interval = r.piece(i);
            let measure = &interval.length() * &r.right[i];
            MeasuredPiece {
                interval,
                value: r.left[i].clone(),
                density: r.right[i].expect_finite("density").clone(),
                measure,
            }
        })
        .collect())
}

impl LevelProfile {
    pub fn of(f: &StepFunction, space: &WeightedSpace) -> Result<Self> {
        let mut by_value: BTreeMap<ExtScalar, ExtScalar> = BTreeMap::new();
        for piece in measured_pieces(f, space)? {
            if piece.measure.is_zero() {
                continue;
            }
            let slot = by_value.entry(piece.value).or_insert_with(ExtScalar::zero);
            *slot = &*slot + &piece.measure;
        }
        Ok(LevelProfile {
            levels: by_value
                .into_iter()
                .map(|(value, measure)| Level { value, measure })
                .collect(),
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn total_measure(&self) -> ExtScalar {
        self.levels.iter().map(|l| l.measure.clone()).sum()
    }

    /// Essential supremum; zero for a null space.
    pub fn esssup(&self) -> ExtScalar {
        self.levels.last().map_or(ExtScalar::zero(), |l| l.value.clone())
    }

    /// `κ_f(s) = μ{f < s}`.
    pub fn measure_below(&self, s: &ExtScalar) -> ExtScalar {
        self.levels.iter().filter(|l| &l.value < s).map(|l| l.measure.clone()).sum()
    }

    /// `μ{f ≥ s}`.
    pub fn measure_at_least(&self, s: &ExtScalar) -> ExtScalar {
        self.levels.iter().filter(|l| &l.value >= s).map(|l| l.measure.clone()).sum()
    }

    /// `μ{f > s}`.
    pub fn measure_above(&self, s: &ExtScalar) -> ExtScalar {
        self.levels.iter().filter(|l| &l.value > s).map(|l| l.measure.clone()).sum()
    }

    /// `μ{f = s}`.
    pub fn measure_at(&self, s: &ExtScalar) -> ExtScalar {
        self.levels
            .iter()
            .find(|l| &l.value == s)
            .map_or(ExtScalar::zero(), |l| l.measure.clone())
    }

    /// The positive finite level values, increasing.
    fn positive_finite_values(&self) -> Vec<Rational> {
        self.levels
            .iter()
            .filter_map(|l| l.value.finite())
            .filter(|v| v > &&Rational::from_integer(0.into()))
            .cloned()
            .collect()
    }
}

/// `μ_f` on `(0, ∞)`; nonincreasing.
pub fn distribution(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let profile = LevelProfile::of(f, space)?;
    let mut segments = Vec::new();
    for b in profile.positive_finite_values() {
        let b = ExtScalar::Finite(b);
        segments.push((profile.measure_at_least(&b), b.finite().cloned()));
    }
    segments.push((profile.measure_at(&ExtScalar::Infinite), None));
    StepFunction::from_segments(Interval::half_line(), segments)
}

/// `κ_f` on `(0, ∞)`; nondecreasing, possibly `+∞`.
pub fn lower_distribution(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let profile = LevelProfile::of(f, space)?;
    let mut segments = Vec::new();
    for b in profile.positive_finite_values() {
        let b = ExtScalar::Finite(b);
        segments.push((profile.measure_below(&b), b.finite().cloned()));
    }
    segments.push((profile.measure_below(&ExtScalar::Infinite), None));
    StepFunction::from_segments(Interval::half_line(), segments)
}

/// `f*` on `(0, μ(R))`, built by stacking level sets in decreasing value order.
pub fn decreasing_rearrangement(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let profile = LevelProfile::of(f, space)?;
    let total = profile.total_measure();
    if total.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let mut segments = Vec::new();
    let mut cursor = ExtScalar::zero();
    for level in profile.levels().iter().rev() {
        cursor = &cursor + &level.measure;
        segments.push((level.value.clone(), cursor.finite().cloned()));
        if cursor.is_infinite() {
            break;
        }
    }
    StepFunction::from_segments(Interval::from_zero(&total)?, segments)
}

/// `f*(t) = inf{s > 0 : μ_f(s) ≤ t}` evaluated from the distribution function.
pub fn decreasing_rearrangement_by_inversion(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let total = space.total_measure();
    if total.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let mu_f = distribution(f, space)?;
    let pieces: Vec<_> = mu_f.pieces().collect();
    // For t in [m_i, m_{i-1}) the first piece with μ_f ≤ t is piece i.
    let mut segments = Vec::new();
    let mut value = ExtScalar::Infinite;
    for (piece, m) in pieces.iter().rev() {
        segments.push((value.clone(), m.finite().cloned()));
        if m.is_infinite() {
            break;
        }
        value = ExtScalar::Finite(piece.lower().expect("pieces of (0, ∞) after the first").clone());
    }
    if segments.last().is_none_or(|(_, end)| end.is_some()) {
        segments.push((value, None));
    }
    let on_half_line = StepFunction::from_segments(Interval::half_line(), segments)?;
    on_half_line.restrict(&Interval::from_zero(&total)?)
}

/// Walks a nondecreasing function on `(0, ∞)` and emits, for each consecutive
/// `t`-range `(k_{i-1}, k_i]`, the value produced by `pick(i)`.
fn invert_nondecreasing(kappa: &StepFunction, pick: impl Fn(usize) -> ExtScalar) -> Result<StepFunction> {
    let mut segments = Vec::new();
    for (i, k) in kappa.values().iter().enumerate() {
        segments.push((pick(i), k.finite().cloned()));
        if k.is_infinite() {
            return StepFunction::from_segments(Interval::half_line(), segments);
        }
    }
    segments.push((ExtScalar::Infinite, None));
    StepFunction::from_segments(Interval::half_line(), segments)
}

fn lower_end(kappa: &StepFunction, i: usize) -> ExtScalar {
    kappa.piece(i).lower().cloned().map_or(ExtScalar::zero(), ExtScalar::Finite)
}

fn upper_end(kappa: &StepFunction, i: usize) -> ExtScalar {
    kappa.piece(i).upper().cloned().map_or(ExtScalar::Infinite, ExtScalar::Finite)
}

/// `f_*(t) = sup{s > 0 : κ_f(s) < t}` on `(0, ∞)`.
pub fn increasing_rearrangement(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let kappa = lower_distribution(f, space)?;
    // For t in (k_{i-1}, k_i] exactly the pieces before i satisfy κ < t, so the
    // supremum is the right end of piece i - 1 (zero when there is none).
    invert_nondecreasing(&kappa, |i| if i == 0 { ExtScalar::zero() } else { upper_end(&kappa, i - 1) })
}

/// `f_*(t) = inf{s > 0 : κ_f(s) ≥ t}`.
pub fn increasing_rearrangement_inf_formula(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let kappa = lower_distribution(f, space)?;
    // The first piece with κ ≥ t is piece i; the infimum is its left end.
    invert_nondecreasing(&kappa, |i| lower_end(&kappa, i))
}

/// `f_*(t) = |{s > 0 : κ_f(s) < t}|`.
pub fn increasing_rearrangement_measure_formula(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let kappa = lower_distribution(f, space)?;
    let lengths: Vec<ExtScalar> = (0..kappa.num_pieces()).map(|i| kappa.piece(i).length()).collect();
    invert_nondecreasing(&kappa, |i| lengths[..i].iter().cloned().sum())
}

/// `f_*` built by stacking level sets in increasing value order, `+∞` past `μ(R)`.
pub fn increasing_rearrangement_by_levels(f: &StepFunction, space: &WeightedSpace) -> Result<StepFunction> {
    let profile = LevelProfile::of(f, space)?;
    let mut segments = Vec::new();
    let mut cursor = ExtScalar::zero();
    for level in profile.levels() {
        cursor = &cursor + &level.measure;
        segments.push((level.value.clone(), cursor.finite().cloned()));
        if cursor.is_infinite() {
            return StepFunction::from_segments(Interval::half_line(), segments);
        }
    }
    segments.push((ExtScalar::Infinite, None));
    StepFunction::from_segments(Interval::half_line(), segments)
}

/// All four derived functions of `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rearrangements {
    pub mu_f: StepFunction,
    pub kappa_f: StepFunction,
    pub f_star: StepFunction,
    pub f_lowstar: StepFunction,
}

pub fn rearrangements(f: &StepFunction, space: &WeightedSpace) -> Result<Rearrangements> {
    Ok(Rearrangements {
        mu_f: distribution(f, space)?,
        kappa_f: lower_distribution(f, space)?,
        f_star: decreasing_rearrangement(f, space)?,
        f_lowstar: increasing_rearrangement(f, space)?,
    })
}

/// Whether `f_*(t) = f*(μ(R) - t)` on `(0, μ(R))`.
pub fn finite_space_duality_check(f: &StepFunction, space: &WeightedSpace) -> Result<bool> {
    let total = space.total_measure();
    let total = match &total {
        ExtScalar::Finite(m) => m.clone(),
        ExtScalar::Infinite => return Err(Error::InfiniteMeasure),
    };
    let f_star = decreasing_rearrangement(f, space)?;
    let reflected = StepFunction::new(
        f_star.domain().clone(),
        f_star.breaks().iter().rev().map(|b| &total - b).collect(),
        f_star.values().iter().rev().cloned().collect(),
    )?;
    let lowstar = increasing_rearrangement(f, space)?.restrict(f_star.domain())?;
    Ok(reflected == lowstar)
}

/// Whether `f` on `space_f` and `g` on `space_g` share a distribution function.
pub fn equimeasurable(
    f: &StepFunction,
    space_f: &WeightedSpace,
    g: &StepFunction,
    space_g: &WeightedSpace,
) -> Result<bool> {
    Ok(distribution(f, space_f)? == distribution(g, space_g)?)
}

/// Whether `∫ f dμ = ∫_0^{μ(R)} f*(t) dt`.
pub fn layer_cake_check(f: &StepFunction, space: &WeightedSpace) -> Result<bool> {
    let direct = space.integrate(f)?;
    if space.total_measure().is_zero() {
        return Ok(direct.is_zero());
    }
    let f_star = decreasing_rearrangement(f, space)?;
    let rearranged = WeightedSpace::lebesgue(f_star.domain().clone()).integrate(&f_star)?;
    Ok(direct == rearranged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn two_piece() -> (StepFunction, WeightedSpace) {
        let dom = Interval::bounded(int(0), int(1)).unwrap();
        let f = StepFunction::new(dom.clone(), vec![rat(1, 2)], vec![ExtScalar::from(1), ExtScalar::from(3)]).unwrap();
        (f, WeightedSpace::lebesgue(dom))
    }

    fn indicator_0_2() -> (StepFunction, WeightedSpace) {
        let f = StepFunction::new(Interval::half_line(), vec![int(2)], vec![ExtScalar::one(), ExtScalar::zero()])
            .unwrap();
        (f, WeightedSpace::lebesgue(Interval::half_line()))
    }

    fn half(segments: Vec<(ExtScalar, Option<Rational>)>) -> StepFunction {
        StepFunction::from_segments(Interval::half_line(), segments).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let (f, space) = two_piece();
        assert_eq!(
            distribution(&f, &space).unwrap(),
            half(vec![(ExtScalar::one(), Some(int(1))), (ExtScalar::ratio(1, 2), Some(int(3))), (ExtScalar::zero(), None)])
        );
        let (g, half_space) = indicator_0_2();
        assert_eq!(
            distribution(&g, &half_space).unwrap(),
            half(vec![(ExtScalar::from(2), Some(int(1))), (ExtScalar::zero(), None)])
        );
        let dom = Interval::bounded(int(0), int(4)).unwrap();
        let c = StepFunction::constant(dom.clone(), ExtScalar::from(5));
        assert_eq!(
            distribution(&c, &WeightedSpace::lebesgue(dom)).unwrap(),
            half(vec![(ExtScalar::from(4), Some(int(5))), (ExtScalar::zero(), None)])
        );
    }

    #[test]
    fn decreasing_examples() {
        let (f, space) = two_piece();
        let expected = StepFunction::new(
            Interval::bounded(int(0), int(1)).unwrap(),
            vec![rat(1, 2)],
            vec![ExtScalar::from(3), ExtScalar::from(1)],
        )
        .unwrap();
        assert_eq!(decreasing_rearrangement(&f, &space).unwrap(), expected);

        let dens = StepFunction::new(f.domain().clone(), vec![rat(1, 2)], vec![ExtScalar::from(2), ExtScalar::one()])
            .unwrap();
        let weighted = WeightedSpace::new(dens).unwrap();
        let expected = StepFunction::new(
            Interval::bounded(int(0), rat(3, 2)).unwrap(),
            vec![rat(1, 2)],
            vec![ExtScalar::from(3), ExtScalar::from(1)],
        )
        .unwrap();
        assert_eq!(decreasing_rearrangement(&f, &weighted).unwrap(), expected);
    }

    #[test]
    fn lower_distribution_examples() {
        let (f, space) = two_piece();
        assert_eq!(
            lower_distribution(&f, &space).unwrap(),
            half(vec![(ExtScalar::zero(), Some(int(1))), (ExtScalar::ratio(1, 2), Some(int(3))), (ExtScalar::one(), None)])
        );
        let (g, half_space) = indicator_0_2();
        assert_eq!(
            lower_distribution(&g, &half_space).unwrap(),
            StepFunction::constant(Interval::half_line(), ExtScalar::Infinite)
        );
    }

    #[test]
    fn increasing_examples() {
        let (f, space) = two_piece();
        let expected = half(vec![
            (ExtScalar::one(), Some(rat(1, 2))),
            (ExtScalar::from(3), Some(int(1))),
            (ExtScalar::Infinite, None),
        ]);
        assert_eq!(increasing_rearrangement(&f, &space).unwrap(), expected);
        assert_eq!(increasing_rearrangement_inf_formula(&f, &space).unwrap(), expected);
        assert_eq!(increasing_rearrangement_measure_formula(&f, &space).unwrap(), expected);
        assert_eq!(increasing_rearrangement_by_levels(&f, &space).unwrap(), expected);

        let (g, half_space) = indicator_0_2();
        assert!(increasing_rearrangement(&g, &half_space).unwrap().is_zero());

        let dom = Interval::bounded(int(0), int(2)).unwrap();
        let c = StepFunction::constant(dom.clone(), ExtScalar::from(7));
        assert_eq!(
            increasing_rearrangement(&c, &WeightedSpace::lebesgue(dom)).unwrap(),
            half(vec![(ExtScalar::from(7), Some(int(2))), (ExtScalar::Infinite, None)])
        );
    }

    #[test]
    fn duality_and_layer_cake() {
        let (f, space) = two_piece();
        assert!(finite_space_duality_check(&f, &space).unwrap());
        assert!(layer_cake_check(&f, &space).unwrap());
        let (g, half_space) = indicator_0_2();
        assert!(matches!(finite_space_duality_check(&g, &half_space), Err(Error::InfiniteMeasure)));
        assert!(layer_cake_check(&g, &half_space).unwrap());

        let dom = Interval::bounded(int(0), int(1)).unwrap();
        let dens = StepFunction::constant(dom.clone(), ExtScalar::from(3));
        let f2 = StepFunction::constant(dom, ExtScalar::from(2));
        let s3 = WeightedSpace::new(dens).unwrap();
        assert_eq!(s3.integrate(&f2).unwrap(), ExtScalar::from(6));
        assert!(layer_cake_check(&f2, &s3).unwrap());
    }

    #[test]
    fn equimeasurable_examples() {
        let dom = Interval::bounded(int(0), int(2)).unwrap();
        let space = WeightedSpace::lebesgue(dom.clone());
        let f = StepFunction::new(dom.clone(), vec![int(1)], vec![ExtScalar::from(3), ExtScalar::one()]).unwrap();
        let g = StepFunction::new(dom.clone(), vec![int(1)], vec![ExtScalar::one(), ExtScalar::from(3)]).unwrap();
        assert!(equimeasurable(&f, &space, &g, &space).unwrap());

        let f_star = decreasing_rearrangement(&g, &space).unwrap();
        let star_space = WeightedSpace::lebesgue(f_star.domain().clone());
        assert!(equimeasurable(&g, &space, &f_star, &star_space).unwrap());

        let chi1 = StepFunction::new(dom.clone(), vec![int(1)], vec![ExtScalar::one(), ExtScalar::zero()]).unwrap();
        let chi2 = StepFunction::constant(dom, ExtScalar::one());
        assert!(!equimeasurable(&chi1, &space, &chi2, &space).unwrap());
    }

    #[test]
    fn inversion_route_matches_on_infinite_values() {
        let dom = Interval::half_line();
        let f = StepFunction::new(dom.clone(), vec![int(1), int(3)], vec![ExtScalar::Infinite, ExtScalar::from(2), ExtScalar::one()])
            .unwrap();
        let space = WeightedSpace::lebesgue(dom);
        assert_eq!(
            decreasing_rearrangement(&f, &space).unwrap(),
            decreasing_rearrangement_by_inversion(&f, &space).unwrap()
        );
    }

    #[test]
    fn null_space_has_no_decreasing_rearrangement() {
        let dom = Interval::bounded(int(0), int(1)).unwrap();
        let space = WeightedSpace::new(StepFunction::zero(dom.clone())).unwrap();
        let f = StepFunction::constant(dom, ExtScalar::one());
        assert!(matches!(decreasing_rearrangement(&f, &space), Err(Error::ZeroMeasure)));
        assert_eq!(
            increasing_rearrangement(&f, &space).unwrap(),
            StepFunction::constant(Interval::half_line(), ExtScalar::Infinite)
        );
    }
}
