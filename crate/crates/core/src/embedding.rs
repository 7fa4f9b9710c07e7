//! Embeddings `L^p(ν) ↪ (L¹+L∞)(μ)` for two measures given by densities on
//! one interval, with the optimal constant computed through rearrangement.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bp::{bp_check, BpReport};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::power_tail::PowerTail;
use crate::real::Real;
use crate::rearrangement::{decreasing_rearrangement, increasing_rearrangement, LevelProfile};
use crate::scalar::{rational_serde, ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::{refine, StepFunction};

/// Densities of `μ` and `ν` with respect to length on a common domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoMeasures {
    w_mu: StepFunction,
    w_nu: StepFunction,
}

impl TwoMeasures {
    pub fn new(w_mu: StepFunction, w_nu: StepFunction) -> Result<Self> {
        if w_mu.domain() != w_nu.domain() {
            return Err(Error::DomainMismatch(w_mu.domain().clone(), w_nu.domain().clone()));
        }
        // Validates finiteness.
        WeightedSpace::new(w_mu.clone())?;
        WeightedSpace::new(w_nu.clone())?;
        Ok(TwoMeasures { w_mu, w_nu })
    }

    pub fn domain(&self) -> &Interval {
        self.w_mu.domain()
    }

    pub fn w_mu(&self) -> &StepFunction {
        &self.w_mu
    }

    pub fn w_nu(&self) -> &StepFunction {
        &self.w_nu
    }

    pub fn mu(&self) -> WeightedSpace {
        WeightedSpace::new(self.w_mu.clone()).expect("validated")
    }

    pub fn nu(&self) -> WeightedSpace {
        WeightedSpace::new(self.w_nu.clone()).expect("validated")
    }

    /// First piece where `w_nu = 0 < w_mu`.
    pub fn first_violation(&self) -> Option<Interval> {
        let r = refine(&self.w_mu, &self.w_nu).expect("shared domain");
        (0..r.len()).find(|&i| r.right[i].is_zero() && !r.left[i].is_zero()).map(|i| r.piece(i))
    }
}

impl<'de> Deserialize<'de> for TwoMeasures {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            w_mu: StepFunction,
            w_nu: StepFunction,
        }
        let r = Repr::deserialize(deserializer)?;
        TwoMeasures::new(r.w_mu, r.w_nu).map_err(serde::de::Error::custom)
    }
}

/// `μ ≪ ν`, i.e. `w_mu = 0` wherever `w_nu = 0`.
pub fn check_abs_continuity(m: &TwoMeasures) -> bool {
    m.first_violation().is_none()
}

/// `dμ/dν = w_mu / w_nu`, set to 0 on `{w_nu = 0}`.
pub fn radon_nikodym(m: &TwoMeasures) -> Result<StepFunction> {
    if let Some(piece) = m.first_violation() {
        return Err(Error::NotAbsolutelyContinuous(piece));
    }
    m.w_mu.zip_with(&m.w_nu, |a, b| match (a, b) {
        (ExtScalar::Finite(a), ExtScalar::Finite(b)) if !b.is_zero() => ExtScalar::Finite(a / b),
        _ => ExtScalar::zero(),
    })
}

/// `min(μ(R), 1)`.
fn budget(space: &WeightedSpace) -> ExtScalar {
    space.total_measure().min(ExtScalar::one())
}

/// `‖f‖_{L¹+L∞} = ∫_0^{min(μ(R),1)} f*(t) dt`.
pub fn l1_plus_linf_norm(f: &StepFunction, space: &WeightedSpace) -> Result<ExtScalar> {
    let b = budget(space);
    if b.is_zero() {
        return Ok(ExtScalar::zero());
    }
    let f_star = decreasing_rearrangement(f, space)?;
    let window = Interval::from_zero(&b)?;
    WeightedSpace::lebesgue(window.clone()).integrate(&f_star.restrict(&window)?)
}

/// `∫_0^{b} φ(g*(t)) dt` for a nonincreasing step `g*`.
fn truncated_integral(g_star: &StepFunction, b: &ExtScalar, phi: impl Fn(&ExtScalar) -> Real) -> Result<Real> {
    if b.is_zero() {
        return Ok(Real::zero());
    }
    let window = Interval::from_zero(b)?;
    let truncated = g_star.restrict(&window)?;
    let mut total = Real::zero();
    for (piece, value) in truncated.pieces() {
        total = total.add(&phi(value).mul(&Real::exact(piece.length())));
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingResult {
    pub absolutely_continuous: bool,
    #[serde(with = "rational_serde")]
    pub p: Rational,
    /// `p' = p/(p−1)`; absent for `p = 1`.
    pub p_prime: Option<String>,
    /// The optimal constant.
    pub a: Real,
    /// `A^{p'} = ∫_0^{min(μ(R),1)} ((dμ/dν)*)^{1/(p−1)} dt`, for `p > 1`.
    pub a_pow_p_prime: Option<Real>,
    /// `A < ∞`.
    pub embedding_holds: bool,
    /// Value of `(dμ/dν)*` just below the budget `min(μ(R),1)`.
    pub threshold: Option<ExtScalar>,
}

fn check_p(p: &Rational) -> Result<()> {
    if p < &Rational::one() {
        return Err(Error::ParameterOutOfRange(format!("p = {p} must be at least 1")));
    }
    Ok(())
}

/// `A^p` as an enclosure.
pub fn a_pow_p(result: &EmbeddingResult) -> Real {
    match &result.a_pow_p_prime {
        Some(app) => app.pow(&(&result.p - Rational::one())),
        None => result.a.clone(),
    }
}

/// The optimal embedding constant `A`.
pub fn embedding_constant(m: &TwoMeasures, p: &Rational) -> Result<EmbeddingResult> {
    check_p(p)?;
    let rn = radon_nikodym(m)?;
    let mu = m.mu();
    let b = budget(&mu);
    let p_prime = (p > &Rational::one()).then(|| p / (p - Rational::one()));
    if b.is_zero() {
        return Ok(EmbeddingResult {
            absolutely_continuous: true,
            p: p.clone(),
            p_prime: p_prime.as_ref().map(crate::scalar::format_rational),
            a: Real::zero(),
            a_pow_p_prime: p_prime.as_ref().map(|_| Real::zero()),
            embedding_holds: true,
            threshold: None,
        });
    }
    let rn_star = decreasing_rearrangement(&rn, &mu)?;
    let threshold = match &b {
        ExtScalar::Finite(b) => Some(rn_star.values()[rn_star.breaks().partition_point(|x| x < b)].clone()),
        ExtScalar::Infinite => None,
    };
    let (a, a_pow_p_prime) = match &p_prime {
        None => (Real::exact(LevelProfile::of(&rn, &mu)?.esssup()), None),
        Some(pp) => {
            let gamma = (p - Rational::one()).recip();
            let app = truncated_integral(&rn_star, &b, |v| Real::exact(v.clone()).pow(&gamma))?;
            (app.pow(&pp.recip()), Some(app))
        }
    };
    Ok(EmbeddingResult {
        absolutely_continuous: true,
        p: p.clone(),
        p_prime: p_prime.as_ref().map(crate::scalar::format_rational),
        embedding_holds: a.is_finite(),
        a,
        a_pow_p_prime,
        threshold,
    })
}

/// `∫ f^p dν`.
pub fn lp_integral(f: &StepFunction, space: &WeightedSpace, p: &Rational) -> Result<Real> {
    let r = refine(f, space.density())?;
    let mut total = Real::zero();
    for i in 0..r.len() {
        let weight = &r.piece(i).length() * &r.right[i];
        if weight.is_zero() || r.left[i].is_zero() {
            continue;
        }
        total = total.add(&Real::exact(r.left[i].clone()).pow(p).mul(&Real::exact(weight)));
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleCheck {
    /// `‖f‖_{L¹+L∞(μ)}`.
    pub l1_plus_linf: ExtScalar,
    /// `∫ f^p dν`.
    pub lp_integral: Real,
    /// `‖f‖_{L¹+L∞} / ‖f‖_{L^p(ν)}`, when the denominator is positive and finite.
    pub ratio: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingNormReport {
    pub constant: EmbeddingResult,
    pub samples: Vec<SampleCheck>,
    pub all_hold: bool,
    pub extremal: Option<StepFunction>,
    pub extremal_ratio: Option<f64>,
    /// The extremal ratio is at least `A·(1 − 10⁻⁹)`.
    pub extremal_attains: bool,
}

/// `‖f‖^p_{L¹+L∞} ≤ A^p·∫ f^p dν` with enclosure margins.
fn check_sample(f: &StepFunction, m: &TwoMeasures, p: &Rational, a_p: &Real) -> Result<SampleCheck> {
    let lhs = l1_plus_linf_norm(f, &m.mu())?;
    let lp = lp_integral(f, &m.nu(), p)?;
    let holds = Real::exact(lhs.clone()).pow(p).possibly_le(&a_p.mul(&lp));
    let ratio = (lp.is_finite() && !lp.is_zero())
        .then(|| lhs.to_f64() / lp.to_f64().powf(1.0 / crate::scalar::rational_to_f64(p)));
    Ok(SampleCheck { l1_plus_linf: lhs, lp_integral: lp, ratio, holds })
}

/// `r^{1/(p−1)}·χ_E` (rounded down to rationals) on a top level set `E` of
/// `dμ/dν` with `μ(E) = min(μ(R), 1)`; for `p = 1`, `χ_E` on a piece of the top level.
pub fn extremal_candidate(m: &TwoMeasures, p: &Rational) -> Result<Option<StepFunction>> {
    let rn = radon_nikodym(m)?;
    let mu = m.mu();
    let b = budget(&mu);
    let ExtScalar::Finite(mut remaining) = b else {
        unreachable!("budget is at most 1")
    };
    if remaining.is_zero() {
        return Ok(None);
    }
    let r = refine(&rn, m.w_mu())?;
    let mut order: Vec<usize> = (0..r.len()).filter(|&i| !r.right[i].is_zero()).collect();
    // Highest ratio first, left to right among ties.
    order.sort_by(|&i, &j| r.left[j].cmp(&r.left[i]).then(i.cmp(&j)));
    if p == &Rational::one() {
        // Concentrate on a small set where the ratio is maximal.
        remaining = remaining.min(Rational::new(1.into(), 1_000_000_000.into()));
    }
    let gamma = (p > &Rational::one()).then(|| (p - Rational::one()).recip());
    let mut segments: Vec<(Interval, Rational)> = Vec::new();
    for i in order {
        if remaining.is_zero() {
            break;
        }
        let piece = r.piece(i);
        let density = r.right[i].expect_finite("density").clone();
        let value = match &gamma {
            Some(g) => Real::exact(r.left[i].clone())
                .pow(g)
                .lower_rational()
                .expect("finite ratio")
                .clone(),
            None => Rational::one(),
        };
        let take = match piece.length() {
            ExtScalar::Finite(len) if &len * &density <= remaining => len,
            _ => &remaining / &density,
        };
        remaining -= &take * &density;
        let sub = match (piece.lower(), piece.upper()) {
            (Some(a), _) => Interval::bounded(a.clone(), a + &take)?,
            (None, Some(c)) => Interval::bounded(c - &take, c.clone())?,
            (None, None) => Interval::bounded(Rational::zero(), take.clone())?,
        };
        segments.push((sub, value));
        if gamma.is_none() {
            break;
        }
    }
    let mut f = StepFunction::zero(m.domain().clone());
    for (sub, value) in segments {
        let bump = StepFunction::constant(sub, ExtScalar::Finite(value)).extend_to(m.domain(), ExtScalar::zero())?;
        f = f.add(&bump)?;
    }
    Ok(Some(f))
}

/// Checks `‖f‖_{L¹+L∞(μ)} ≤ A‖f‖_{L^p(ν)}` on the samples and on the extremal candidate.
pub fn verify_embedding_norm(m: &TwoMeasures, p: &Rational, samples: &[StepFunction]) -> Result<EmbeddingNormReport> {
    let constant = embedding_constant(m, p)?;
    let a_p = a_pow_p(&constant);
    let checks = samples.iter().map(|f| check_sample(f, m, p, &a_p)).collect::<Result<Vec<_>>>()?;
    let extremal = extremal_candidate(m, p)?;
    let (extremal_ratio, extremal_attains) = match &extremal {
        Some(f) => {
            let c = check_sample(f, m, p, &a_p)?;
            let ratio = c.ratio;
            let attains = ratio.is_some_and(|r| r >= constant.a.to_f64() * (1.0 - 1e-9)) && c.holds;
            (ratio, attains)
        }
        None => (None, true),
    };
    Ok(EmbeddingNormReport {
        all_hold: checks.iter().all(|c| c.holds),
        samples: checks,
        constant,
        extremal,
        extremal_ratio,
        extremal_attains,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorollaryReport {
    #[serde(with = "rational_serde")]
    pub p: Rational,
    pub bp: BpReport,
    /// `‖v^{−1/(p−1)}‖_{(L¹+L∞)(μ)}`.
    pub norm: Real,
    pub norm_finite: bool,
    /// `A^{p'}` for `ν = v·μ`, when computed.
    pub a_pow_p_prime: Option<Real>,
    /// `A^{p'}` equals the norm (enclosures overlap, exact when both are exact).
    pub identity_holds: Option<bool>,
}

fn check_corollary_p(p: &Rational) -> Result<Rational> {
    if p <= &Rational::one() {
        return Err(Error::ParameterOutOfRange(format!("p = {p} must exceed 1")));
    }
    Ok((p - Rational::one()).recip())
}

/// The weight seen by the Lorentz functional: `v_*` on `(0, μ(R))`, zero beyond.
fn lorentz_weight(v_lowstar: &StepFunction, total: &ExtScalar) -> Result<PowerTail> {
    let weight = match total {
        ExtScalar::Infinite => v_lowstar.clone(),
        ExtScalar::Finite(_) => v_lowstar
            .restrict(&Interval::from_zero(total)?)?
            .extend_to(&Interval::half_line(), ExtScalar::zero())?,
    };
    PowerTail::from_step(&weight)
}

/// For a step weight `v` on `space` with `v_* ∈ B_p`: finiteness of
/// `‖v^{−1/(p−1)}‖_{L¹+L∞}` and its identity with `A^{p'}` for `dν = v dμ`.
pub fn corollary_check(space: &WeightedSpace, v: &StepFunction, p: &Rational) -> Result<CorollaryReport> {
    let gamma = check_corollary_p(p)?;
    let total = space.total_measure();
    if total.is_zero() {
        return Err(Error::ZeroMeasure);
    }
    let v_lowstar = increasing_rearrangement(v, space)?;
    let bp = bp_check(&lorentz_weight(&v_lowstar, &total)?, p)?;
    if !bp.in_class {
        return Err(Error::NotInBp(format!("B_p constant {}", bp.constant_c)));
    }
    // (v^{-γ})* = (v_*)^{-γ} since x ↦ x^{-γ} is decreasing.
    let b = budget(space);
    let window = Interval::from_zero(&b)?;
    let mut norm = Real::zero();
    for (piece, value) in v_lowstar.restrict(&window)?.pieces() {
        norm = norm.add(&Real::exact(value.clone()).pow(&-&gamma).mul(&Real::exact(piece.length())));
    }
    let w_nu = v.mul(space.density())?;
    let m = TwoMeasures::new(space.density().clone(), w_nu)?;
    let a_pow_p_prime = embedding_constant(&m, p)?.a_pow_p_prime;
    let identity_holds = a_pow_p_prime.as_ref().map(|a| a.overlaps(&norm));
    Ok(CorollaryReport { p: p.clone(), bp, norm_finite: norm.is_finite(), norm, a_pow_p_prime, identity_holds })
}

/// The same for a nondecreasing power-tail weight `w` taken as `v_*` on
/// Lebesgue `(0, ∞)`: the norm is `∫_0^1 w^{−1/(p−1)} dt`.
pub fn corollary_check_power(w: &PowerTail, p: &Rational) -> Result<CorollaryReport> {
    let gamma = check_corollary_p(p)?;
    if !w.is_nondecreasing() {
        return Err(Error::Unsupported("the weight must be nondecreasing to serve as v_*".into()));
    }
    let bp = bp_check(w, p)?;
    if !bp.in_class {
        return Err(Error::NotInBp(format!("B_p constant {}", bp.constant_c)));
    }
    let norm = w.pow(&-&gamma).integral(&Interval::bounded(Rational::zero(), Rational::one())?)?;
    Ok(CorollaryReport {
        p: p.clone(),
        bp,
        norm_finite: norm.is_finite(),
        norm,
        a_pow_p_prime: None,
        identity_holds: None,
    })
}

/// Whether the ratio values are all nonnegative (sanity for callers building measures).
pub fn is_nonnegative(f: &StepFunction) -> bool {
    f.values().iter().all(|v| !v.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn two_level() -> TwoMeasures {
        let dom = Interval::half_line();
        let w_mu = StepFunction::constant(dom.clone(), ExtScalar::one());
        let w_nu = StepFunction::new(dom, vec![int(1)], vec![4.into(), 1.into()]).unwrap();
        TwoMeasures::new(w_mu, w_nu).unwrap()
    }

    #[test]
    fn abs_continuity_and_density() {
        let dom = Interval::half_line();
        let w = StepFunction::new(dom.clone(), vec![int(1)], vec![2.into(), 1.into()]).unwrap();
        assert!(check_abs_continuity(&TwoMeasures::new(w.clone(), w.clone()).unwrap()));
        let gap = StepFunction::new(dom.clone(), vec![int(1)], vec![0.into(), 1.into()]).unwrap();
        let bad = TwoMeasures::new(StepFunction::constant(dom.clone(), ExtScalar::one()), gap.clone()).unwrap();
        assert!(!check_abs_continuity(&bad));
        assert!(matches!(radon_nikodym(&bad), Err(Error::NotAbsolutelyContinuous(_))));
        assert!(matches!(embedding_constant(&bad, &int(2)), Err(Error::NotAbsolutelyContinuous(_))));
        assert!(check_abs_continuity(&TwoMeasures::new(gap.clone(), gap).unwrap()));

        let double = TwoMeasures::new(w.mul(&StepFunction::constant(dom.clone(), 2.into())).unwrap(), w).unwrap();
        assert_eq!(radon_nikodym(&double).unwrap(), StepFunction::constant(dom.clone(), 2.into()));
        let expected = StepFunction::new(dom, vec![int(1)], vec![ExtScalar::ratio(1, 4), ExtScalar::one()]).unwrap();
        assert_eq!(radon_nikodym(&two_level()).unwrap(), expected);
    }

    #[test]
    fn l1_plus_linf_examples() {
        let half = WeightedSpace::lebesgue(Interval::half_line());
        assert_eq!(l1_plus_linf_norm(&StepFunction::constant(Interval::half_line(), 1.into()), &half).unwrap(), 1.into());
        let dom = Interval::bounded(int(0), int(2)).unwrap();
        let f = StepFunction::new(dom.clone(), vec![rat(1, 2)], vec![3.into(), 1.into()]).unwrap();
        assert_eq!(l1_plus_linf_norm(&f, &WeightedSpace::lebesgue(dom)).unwrap(), 2.into());
        let short = Interval::bounded(int(0), rat(1, 2)).unwrap();
        let four = StepFunction::constant(short.clone(), 4.into());
        assert_eq!(l1_plus_linf_norm(&four, &WeightedSpace::lebesgue(short)).unwrap(), 2.into());
    }

    #[test]
    fn constant_examples() {
        let dom = Interval::half_line();
        let same = TwoMeasures::new(
            StepFunction::constant(dom.clone(), 1.into()),
            StepFunction::constant(dom, 1.into()),
        )
        .unwrap();
        let r = embedding_constant(&same, &int(2)).unwrap();
        assert_eq!(r.a, Real::one());
        assert_eq!(r.p_prime.as_deref(), Some("2"));

        let small = Interval::bounded(int(0), rat(1, 4)).unwrap();
        let finite = TwoMeasures::new(
            StepFunction::constant(small.clone(), 1.into()),
            StepFunction::constant(small, 1.into()),
        )
        .unwrap();
        assert_eq!(embedding_constant(&finite, &int(2)).unwrap().a, Real::from(rat(1, 2)));

        let r = embedding_constant(&two_level(), &int(2)).unwrap();
        assert_eq!(r.a, Real::one());
        assert_eq!(r.threshold, Some(ExtScalar::one()));
        assert_eq!(embedding_constant(&two_level(), &int(1)).unwrap().a, Real::one());
    }

    #[test]
    fn norm_inequality_and_extremal() {
        let m = two_level();
        let dom = Interval::half_line();
        let samples = vec![
            StepFunction::zero(dom.clone()),
            StepFunction::new(dom.clone(), vec![int(1)], vec![1.into(), 0.into()]).unwrap(),
            StepFunction::new(dom, vec![int(1), int(3)], vec![5.into(), 2.into(), 0.into()]).unwrap(),
        ];
        for p in [int(2), rat(3, 2), int(3), int(1)] {
            let report = verify_embedding_norm(&m, &p, &samples).unwrap();
            assert!(report.all_hold, "p = {p}");
            assert!(report.extremal_attains, "p = {p}: {:?}", report.extremal_ratio);
        }
        let report = verify_embedding_norm(&m, &int(2), &samples).unwrap();
        assert_eq!(report.samples[0].ratio, None);
    }

    #[test]
    fn corollary_examples() {
        let half = WeightedSpace::lebesgue(Interval::half_line());
        let one = StepFunction::constant(Interval::half_line(), 1.into());
        let r = corollary_check(&half, &one, &int(3)).unwrap();
        assert_eq!(r.norm, Real::one());
        assert_eq!(r.identity_holds, Some(true));

        let v = StepFunction::new(Interval::half_line(), vec![int(1)], vec![1.into(), 2.into()]).unwrap();
        let r = corollary_check(&half, &v, &int(2)).unwrap();
        assert_eq!(r.norm, Real::one());
        assert_eq!(r.a_pow_p_prime, Some(Real::one()));

        let dom = Interval::bounded(int(0), rat(1, 2)).unwrap();
        let r = corollary_check(&WeightedSpace::lebesgue(dom.clone()), &StepFunction::constant(dom, 1.into()), &int(2))
            .unwrap();
        assert_eq!(r.norm, Real::from(rat(1, 2)));
        assert_eq!(r.identity_holds, Some(true));

        let x = PowerTail::monomial(int(1), int(1));
        let r = corollary_check_power(&x, &int(3)).unwrap();
        assert_eq!(r.norm, Real::from(int(2)));
    }
}
