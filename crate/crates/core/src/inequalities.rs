//! The Hardy–Littlewood inequality and its reverse form on arbitrary
//! (possibly infinite) weighted intervals.

use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::real::Real;
use crate::rearrangement::{decreasing_rearrangement, increasing_rearrangement};
use crate::scalar::{ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

/// Both sides of an inequality `lhs ≤ rhs` or `lhs ≥ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InequalityReport {
    pub lhs: Real,
    pub rhs: Real,
    pub holds: bool,
    /// `|lhs − rhs|` when both sides are finite.
    pub slack: Option<Real>,
}

impl InequalityReport {
    fn slack(lhs: &Real, rhs: &Real) -> Option<Real> {
        if !(lhs.is_finite() && rhs.is_finite()) {
            return None;
        }
        let d = lhs.sub(rhs);
        Some(if d.hi().is_negative() { rhs.sub(lhs) } else { d })
    }

    /// `lhs ≤ rhs`, with enclosure widths as margin.
    pub fn le(lhs: Real, rhs: Real) -> Self {
        let holds = lhs.possibly_le(&rhs);
        let slack = Self::slack(&lhs, &rhs);
        InequalityReport { lhs, rhs, holds, slack }
    }

    /// `lhs ≥ rhs`, with enclosure widths as margin.
    pub fn ge(lhs: Real, rhs: Real) -> Self {
        let holds = rhs.possibly_le(&lhs);
        let slack = Self::slack(&lhs, &rhs);
        InequalityReport { lhs, rhs, holds, slack }
    }
}

/// `∫_0^end a(t) b(t) dt` for functions defined at least on `(0, end)`.
pub fn product_integral(a: &StepFunction, b: &StepFunction, end: &ExtScalar) -> Result<ExtScalar> {
    if end.is_zero() {
        return Ok(ExtScalar::zero());
    }
    let window = Interval::from_zero(end)?;
    let a = a.restrict(&window)?;
    let b = b.restrict(&window)?;
    WeightedSpace::lebesgue(window).integrate(&a.mul(&b)?)
}

/// `∫ f g dμ ≤ ∫_0^{μ(R)} f* g* dt`.
pub fn hardy_littlewood(f: &StepFunction, g: &StepFunction, space: &WeightedSpace) -> Result<InequalityReport> {
    let lhs = space.integrate(&f.mul(g)?)?;
    let total = space.total_measure();
    let rhs = if total.is_zero() {
        ExtScalar::zero()
    } else {
        product_integral(&decreasing_rearrangement(f, space)?, &decreasing_rearrangement(g, space)?, &total)?
    };
    Ok(InequalityReport::le(lhs.into(), rhs.into()))
}

/// `∫ f g dμ ≥ ∫_0^{μ(R)} f* g_* dt`.
pub fn reverse_hardy_littlewood(
    f: &StepFunction,
    g: &StepFunction,
    space: &WeightedSpace,
) -> Result<InequalityReport> {
    let lhs = space.integrate(&f.mul(g)?)?;
    let total = space.total_measure();
    let rhs = if total.is_zero() {
        ExtScalar::zero()
    } else {
        product_integral(&decreasing_rearrangement(f, space)?, &increasing_rearrangement(g, space)?, &total)?
    };
    Ok(InequalityReport::ge(lhs.into(), rhs.into()))
}

/// A nested simple function `Σ α_i χ_{E_i}` with `E_1 ⊆ E_2 ⊆ …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedLayers {
    layers: Vec<(Rational, Interval)>,
}

impl NestedLayers {
    pub fn new(layers: Vec<(Rational, Interval)>) -> Result<Self> {
        if let Some((alpha, _)) = layers.iter().find(|(a, _)| a.is_negative()) {
            return Err(Error::NonNestedLayers(format!("negative coefficient {alpha}")));
        }
        for w in layers.windows(2) {
            if !w[1].1.contains_interval(&w[0].1) {
                return Err(Error::NonNestedLayers(format!("{} is not contained in {}", w[0].1, w[1].1)));
            }
        }
        Ok(NestedLayers { layers })
    }

    pub fn layers(&self) -> &[(Rational, Interval)] {
        &self.layers
    }

    /// The simple function on `domain`.
    pub fn to_step(&self, domain: &Interval) -> Result<StepFunction> {
        let mut f = StepFunction::zero(domain.clone());
        for (alpha, e) in &self.layers {
            let indicator = StepFunction::constant(e.clone(), ExtScalar::Finite(alpha.clone()))
                .extend_to(domain, ExtScalar::zero())?;
            f = f.add(&indicator)?;
        }
        Ok(f)
    }
}

/// The intermediate quantities of the layered argument, all exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    /// `∫ f g dμ`.
    pub integral: ExtScalar,
    /// `Σ α_i ∫_{E_i} g dμ`.
    pub layered: ExtScalar,
    /// `Σ α_i ∫_0^{μ(E_i)} (g↾E_i)_* dt`.
    pub restricted: ExtScalar,
    /// `Σ α_i ∫_0^{μ(E_i)} g_* dt`.
    pub global: ExtScalar,
    /// `∫_0^{μ(R)} f* g_* dt`.
    pub rhs: ExtScalar,
    pub holds: bool,
}

/// Evaluates `∫ fg = Σ α_i∫_{E_i} g ≥ Σ α_i∫(g↾E_i)_* ≥ Σ α_i∫g_* = ∫ f* g_*`.
pub fn reverse_hl_simple_chain(
    layers: &NestedLayers,
    g: &StepFunction,
    space: &WeightedSpace,
) -> Result<ChainReport> {
    let f = layers.to_step(space.domain())?;
    let integral = space.integrate(&f.mul(g)?)?;
    let g_lowstar = increasing_rearrangement(g, space)?;
    let mut layered = ExtScalar::zero();
    let mut restricted = ExtScalar::zero();
    let mut global = ExtScalar::zero();
    for (alpha, e) in layers.layers() {
        let alpha = ExtScalar::Finite(alpha.clone());
        let mask = StepFunction::constant(e.clone(), ExtScalar::one()).extend_to(space.domain(), ExtScalar::zero())?;
        let on_e = space.restrict_to(&mask)?;
        let m = on_e.total_measure();
        if m.is_infinite() {
            return Err(Error::NonNestedLayers(format!("layer {e} has infinite measure")));
        }
        let one = StepFunction::constant(Interval::half_line(), ExtScalar::one());
        layered = &layered + &(&alpha * &on_e.integrate(g)?);
        restricted = &restricted + &(&alpha * &product_integral(&increasing_rearrangement(g, &on_e)?, &one, &m)?);
        global = &global + &(&alpha * &product_integral(&g_lowstar, &one, &m)?);
    }
    let total = space.total_measure();
    let rhs = if total.is_zero() {
        ExtScalar::zero()
    } else {
        product_integral(&decreasing_rearrangement(&f, space)?, &g_lowstar, &total)?
    };
    let holds = integral == layered && layered >= restricted && restricted >= global && global == rhs;
    Ok(ChainReport { integral, layered, restricted, global, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn two_piece() -> (StepFunction, WeightedSpace) {
        let dom = Interval::bounded(int(0), int(1)).unwrap();
        let f = StepFunction::new(dom.clone(), vec![rat(1, 2)], vec![1.into(), 3.into()]).unwrap();
        (f, WeightedSpace::lebesgue(dom))
    }

    #[test]
    fn forward_examples() {
        let (f, space) = two_piece();
        let r = hardy_littlewood(&f, &f, &space).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone(), r.holds), (Real::from(int(5)), Real::from(int(5)), true));
        assert_eq!(r.slack, Some(Real::zero()));

        let dom = Interval::bounded(int(0), int(2)).unwrap();
        let space = WeightedSpace::lebesgue(dom.clone());
        let a = StepFunction::new(dom.clone(), vec![int(1)], vec![1.into(), 0.into()]).unwrap();
        let b = StepFunction::new(dom.clone(), vec![int(1)], vec![0.into(), 2.into()]).unwrap();
        let r = hardy_littlewood(&a, &b, &space).unwrap();
        assert!(r.holds && r.lhs.is_zero());
        assert_eq!(r.rhs, Real::from(int(2)));

        let c = StepFunction::new(dom.clone(), vec![int(1)], vec![3.into(), 2.into()]).unwrap();
        let d = StepFunction::new(dom, vec![rat(1, 2)], vec![5.into(), 1.into()]).unwrap();
        let r = hardy_littlewood(&c, &d, &space).unwrap();
        assert_eq!(r.lhs, r.rhs);
    }

    #[test]
    fn reverse_examples() {
        let (f, space) = two_piece();
        let r = reverse_hardy_littlewood(&f, &f, &space).unwrap();
        assert_eq!((r.lhs.clone(), r.rhs.clone(), r.holds), (Real::from(int(5)), Real::from(int(3)), true));

        let one = StepFunction::constant(f.domain().clone(), ExtScalar::one());
        let r = reverse_hardy_littlewood(&one, &f, &space).unwrap();
        assert_eq!(r.lhs, Real::from(int(2)));
        assert_eq!(r.lhs, r.rhs);

        let half = WeightedSpace::lebesgue(Interval::half_line());
        let g = StepFunction::new(Interval::half_line(), vec![int(2)], vec![1.into(), 0.into()]).unwrap();
        let any = StepFunction::new(Interval::half_line(), vec![int(1)], vec![4.into(), 1.into()]).unwrap();
        let r = reverse_hardy_littlewood(&any, &g, &half).unwrap();
        assert!(r.holds && r.rhs.is_zero());
        assert_eq!(r.lhs, Real::from(int(5)));
    }

    #[test]
    fn chain_examples() {
        let dom = Interval::bounded(int(0), int(2)).unwrap();
        let space = WeightedSpace::lebesgue(dom.clone());
        let g = StepFunction::new(dom.clone(), vec![rat(1, 2), int(1)], vec![1.into(), 3.into(), 2.into()]).unwrap();

        let single = NestedLayers::new(vec![(int(1), Interval::bounded(int(0), int(1)).unwrap())]).unwrap();
        let r = reverse_hl_simple_chain(&single, &g, &space).unwrap();
        assert!(r.holds);
        assert_eq!(r.integral, ExtScalar::from(2));
        assert_eq!(r.restricted, ExtScalar::from(2));
        assert_eq!(r.global, ExtScalar::ratio(3, 2));

        let two = NestedLayers::new(vec![
            (int(2), Interval::bounded(int(0), int(1)).unwrap()),
            (int(1), dom.clone()),
        ])
        .unwrap();
        let r = reverse_hl_simple_chain(&two, &g, &space).unwrap();
        assert!(r.holds);
        assert_eq!(r.integral, ExtScalar::from(8));
        assert_eq!(r.layered, ExtScalar::from(8));
        assert_eq!(r.restricted, ExtScalar::from(8));
        assert_eq!(r.global, ExtScalar::from(7));
        assert_eq!(r.rhs, ExtScalar::from(7));

        let zero = NestedLayers::new(vec![(int(0), Interval::bounded(int(0), int(1)).unwrap())]).unwrap();
        let r = reverse_hl_simple_chain(&zero, &g, &space).unwrap();
        assert!(r.holds && r.integral.is_zero() && r.rhs.is_zero());
    }

    #[test]
    fn chain_rejects_non_nested() {
        let layers = vec![
            (int(1), Interval::bounded(int(0), int(2)).unwrap()),
            (int(1), Interval::bounded(int(0), int(1)).unwrap()),
        ];
        assert!(matches!(NestedLayers::new(layers), Err(Error::NonNestedLayers(_))));
    }
}
