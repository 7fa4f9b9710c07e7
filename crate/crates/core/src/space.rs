//! Weighted measure spaces `(R, μ)` with `dμ = density · dx` on an interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::ExtScalar;
use crate::step::{refine, StepFunction};

/// An interval carrying the absolutely continuous measure `density · dx`.
///
/// The density is finite-valued, so the measure is σ-finite and nonatomic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedSpace {
    density: StepFunction,
}

impl WeightedSpace {
    pub fn new(density: StepFunction) -> Result<Self> {
        if !density.is_finite_valued() {
            return Err(Error::InvalidStep("densities must be finite-valued".into()));
        }
        Ok(WeightedSpace { density })
    }

    /// Lebesgue measure on `domain`.
    pub fn lebesgue(domain: Interval) -> Self {
        WeightedSpace { density: StepFunction::constant(domain, ExtScalar::one()) }
    }

    pub fn domain(&self) -> &Interval {
        self.density.domain()
    }

    pub fn density(&self) -> &StepFunction {
        &self.density
    }

    /// `μ(R)`.
    pub fn total_measure(&self) -> ExtScalar {
        self.density
            .pieces()
            .map(|(piece, d)| &piece.length() * d)
            .sum()
    }

    /// `μ(I)` for a subinterval `I` of the domain.
    pub fn measure_of(&self, sub: &Interval) -> Result<ExtScalar> {
        Ok(self
            .density
            .restrict(sub)?
            .pieces()
            .map(|(piece, d)| &piece.length() * d)
            .sum())
    }

    /// The same domain with the measure restricted to `{mask > 0}`.
    pub fn restrict_to(&self, mask: &StepFunction) -> Result<WeightedSpace> {
        let density = self.density.zip_with(mask, |d, m| {
            if m.is_zero() {
                ExtScalar::zero()
            } else {
                d.clone()
            }
        })?;
        Ok(WeightedSpace { density })
    }

    /// The sub-space on a subinterval of the domain.
    pub fn sub_interval(&self, sub: &Interval) -> Result<WeightedSpace> {
        Ok(WeightedSpace { density: self.density.restrict(sub)? })
    }

    fn check_domain(&self, f: &StepFunction) -> Result<()> {
        if f.domain() != self.domain() {
            return Err(Error::DomainMismatch(f.domain().clone(), self.domain().clone()));
        }
        Ok(())
    }

    /// Whether `f = g` μ-almost everywhere.
    pub fn agree_ae(&self, f: &StepFunction, g: &StepFunction) -> Result<bool> {
        self.check_domain(f)?;
        let fg = refine(f, g)?;
        for i in 0..fg.len() {
            if fg.left[i] != fg.right[i] && !self.measure_of(&fg.piece(i))?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `∫ f dμ`, exact, with `0 · ∞ = 0`.
    pub fn integrate(&self, f: &StepFunction) -> Result<ExtScalar> {
        self.check_domain(f)?;
        let r = refine(f, &self.density)?;
        Ok((0..r.len())
            .map(|i| &(&r.piece(i).length() * &r.left[i]) * &r.right[i])
            .sum())
    }
}

impl<'de> Deserialize<'de> for WeightedSpace {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            density: StepFunction,
        }
        let repr = Repr::deserialize(deserializer)?;
        WeightedSpace::new(repr.density).map_err(serde::de::Error::custom)
    }
}

/// `∫ f dμ`.
pub fn integrate(f: &StepFunction, space: &WeightedSpace) -> Result<ExtScalar> {
    space.integrate(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn integrate_examples() {
        let unit = Interval::bounded(int(0), int(1)).unwrap();
        let one = StepFunction::constant(unit.clone(), ExtScalar::one());
        assert_eq!(integrate(&one, &WeightedSpace::lebesgue(unit)).unwrap(), ExtScalar::one());

        let two = Interval::bounded(int(0), int(2)).unwrap();
        let f = StepFunction::new(two.clone(), vec![int(1)], vec![ExtScalar::from(2), ExtScalar::from(3)]).unwrap();
        assert_eq!(integrate(&f, &WeightedSpace::lebesgue(two)).unwrap(), ExtScalar::from(5));

        let g = StepFunction::new(Interval::half_line(), vec![int(1)], vec![ExtScalar::one(), ExtScalar::zero()])
            .unwrap();
        assert_eq!(
            integrate(&g, &WeightedSpace::lebesgue(Interval::half_line())).unwrap(),
            ExtScalar::one()
        );
    }

    #[test]
    fn infinite_integrals() {
        let half = WeightedSpace::lebesgue(Interval::half_line());
        let c = StepFunction::constant(Interval::half_line(), ExtScalar::ratio(1, 1000));
        assert_eq!(half.integrate(&c).unwrap(), ExtScalar::Infinite);
        assert_eq!(half.total_measure(), ExtScalar::Infinite);
    }

    #[test]
    fn measures_and_restriction() {
        let dom = Interval::half_line();
        let density =
            StepFunction::new(dom.clone(), vec![int(1), int(2)], vec![ExtScalar::from(2), ExtScalar::zero(), ExtScalar::one()])
                .unwrap();
        let space = WeightedSpace::new(density).unwrap();
        assert_eq!(space.measure_of(&Interval::bounded(rat(1, 2), int(3)).unwrap()).unwrap(), ExtScalar::from(2));
        let mask = StepFunction::new(dom, vec![int(3)], vec![ExtScalar::one(), ExtScalar::zero()]).unwrap();
        assert_eq!(space.restrict_to(&mask).unwrap().total_measure(), ExtScalar::from(3));
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let space = WeightedSpace::lebesgue(Interval::half_line());
        let f = StepFunction::zero(Interval::real_line());
        assert!(matches!(space.integrate(&f), Err(Error::DomainMismatch(..))));
    }
}
