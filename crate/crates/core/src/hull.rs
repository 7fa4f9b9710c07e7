//! The weighted `L^p` norm over functions equimeasurable with `g`: the lower
//! bound by the weighted Lorentz functional of `v_*`, and explicit witnesses
//! that attain it up to a factor `(1+ε)`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::InequalityReport;
use crate::interval::Interval;
use crate::mpt::{
    build_increasing_mpt, compose_with_rearrangement, null_piece, ryff_conditions, source_order, split_unbounded,
    tile_pieces, verify_mpt, MPTransform, RyffVerdict,
};
use crate::power_tail::PowerTail;
use crate::real::{pow_rational, Real};
use crate::rearrangement::{
    decreasing_rearrangement, distribution, equimeasurable, increasing_rearrangement, measured_pieces, LevelProfile,
};
use crate::scalar::{format_rational, rational_serde, ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::{refine, StepFunction};

/// A weight `v` on a weighted space with exponent `p`, and the data derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullInstance {
    space: WeightedSpace,
    v: StepFunction,
    p: Rational,
    v_lowstar: StepFunction,
    profile: LevelProfile,
    s: ExtScalar,
    t: ExtScalar,
}

impl HullInstance {
    pub fn new(space: WeightedSpace, v: StepFunction, p: Rational) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::ParameterOutOfRange(format!("p = {p} must be positive")));
        }
        if !v.is_finite_valued() || v.values().iter().any(ExtScalar::is_negative) {
            return Err(Error::InvalidStep(format!("weight {v} must be finite and nonnegative")));
        }
        let v_lowstar = increasing_rearrangement(&v, &space)?;
        let profile = LevelProfile::of(&v, &space)?;
        let t = profile.esssup();
        let s = profile
            .levels()
            .iter()
            .find(|l| l.measure.is_infinite())
            .map_or_else(|| t.clone(), |l| l.value.clone());
        Ok(HullInstance { space, v, p, v_lowstar, profile, s, t })
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn v(&self) -> &StepFunction {
        &self.v
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn v_lowstar(&self) -> &StepFunction {
        &self.v_lowstar
    }

    /// The first level of infinite measure, or `T` when there is none.
    pub fn s(&self) -> &ExtScalar {
        &self.s
    }

    /// `esssup v`.
    pub fn t(&self) -> &ExtScalar {
        &self.t
    }

    /// `κ_v(S)`, finite for step weights.
    pub fn kappa_s(&self) -> ExtScalar {
        self.profile.measure_below(&self.s)
    }

    pub fn vstar_is_zero(&self) -> bool {
        self.v_lowstar.is_zero()
    }

    /// `v_*` on `(0, μ(R))` extended by zero to `(0, ∞)`.
    pub fn lorentz_weight(&self) -> Result<PowerTail> {
        let total = self.space.total_measure();
        let weight = match &total {
            ExtScalar::Infinite => self.v_lowstar.clone(),
            ExtScalar::Finite(_) => self
                .v_lowstar
                .restrict(&Interval::from_zero(&total)?)?
                .extend_to(&Interval::half_line(), ExtScalar::zero())?,
        };
        PowerTail::from_step(&weight)
    }
}

/// `∫_0^M g*(t)^p w(t) dt` for `g*` on `(0, M)` and a weight defined at least there.
pub fn lambda_integral(g_star: &StepFunction, weight: &StepFunction, p: &Rational) -> Result<Real> {
    let w = weight.restrict(g_star.domain())?;
    let r = refine(g_star, &w)?;
    let mut total = Real::zero();
    for i in 0..r.len() {
        if r.left[i].is_zero() {
            continue;
        }
        let mass = &r.right[i] * &r.piece(i).length();
        total = total.add(&Real::exact(r.left[i].clone()).pow(p).mul(&Real::exact(mass)));
    }
    Ok(total)
}

/// `‖g‖_{Λ^p(w)} = (∫ g*^p w dt)^{1/p}`.
pub fn lambda_norm(g: &StepFunction, space: &WeightedSpace, weight: &StepFunction, p: &Rational) -> Result<Real> {
    if space.total_measure().is_zero() {
        return Ok(Real::zero());
    }
    Ok(lambda_integral(&decreasing_rearrangement(g, space)?, weight, p)?.pow(&p.recip()))
}

/// `∫ f^p v dμ`.
pub fn weighted_lp_integral(f: &StepFunction, space: &WeightedSpace, v: &StepFunction, p: &Rational) -> Result<Real> {
    if f.domain() != space.domain() {
        return Err(Error::DomainMismatch(f.domain().clone(), space.domain().clone()));
    }
    let weight = v.mul(space.density())?;
    let r = refine(f, &weight)?;
    let mut total = Real::zero();
    for i in 0..r.len() {
        if r.left[i].is_zero() {
            continue;
        }
        let mass = &r.right[i] * &r.piece(i).length();
        total = total.add(&Real::exact(r.left[i].clone()).pow(p).mul(&Real::exact(mass)));
    }
    Ok(total)
}

/// `(∫ f^p v dμ)^{1/p}`.
pub fn weighted_lp_norm(f: &StepFunction, space: &WeightedSpace, v: &StepFunction, p: &Rational) -> Result<Real> {
    Ok(weighted_lp_integral(f, space, v, p)?.pow(&p.recip()))
}

/// `∫ f*^p v_* dt ≤ ∫ f^p v dμ`, both sides as `p`-th powers.
pub fn hull_lower_bound(f: &StepFunction, instance: &HullInstance) -> Result<InequalityReport> {
    let space = instance.space();
    let lhs = if space.total_measure().is_zero() {
        Real::zero()
    } else {
        lambda_integral(&decreasing_rearrangement(f, space)?, instance.v_lowstar(), instance.p())?
    };
    let rhs = weighted_lp_integral(f, space, instance.v(), instance.p())?;
    Ok(InequalityReport::le(lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// `κ_v(S) = ∞`; not reachable with step weights.
    KappaInfinite,
    FiniteS,
    /// `S = ∞`; not reachable with finite-valued weights.
    InfiniteS,
    EpsilonZero,
    VstarZero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub f: StepFunction,
    pub equimeasurable_with_g: bool,
    /// `∫ g*^p v_* dt`.
    pub lambda_integral: Real,
    /// `∫ f^p v dμ`.
    pub lp_integral: Real,
    pub lambda_norm: Real,
    pub lp_norm: Real,
    /// The right side of the sandwich in `p`-th-power form.
    pub upper_bound: Real,
    #[serde(with = "rational_serde")]
    pub epsilon_used: Rational,
    pub case_tag: CaseTag,
    pub sandwich_holds: bool,
    /// The transformations used are measure preserving.
    pub sigma_valid: bool,
}

impl WitnessReport {
    pub fn passes(&self) -> bool {
        self.equimeasurable_with_g && self.sandwich_holds && self.sigma_valid
    }
}

fn check_g_star(g_star: &StepFunction, total: &ExtScalar) -> Result<()> {
    let expected = Interval::from_zero(total)?;
    if g_star.domain() != &expected {
        return Err(Error::DomainMismatch(g_star.domain().clone(), expected));
    }
    if !g_star.is_nonincreasing() || g_star.values().iter().any(ExtScalar::is_negative) {
        return Err(Error::InvalidStep(format!("{g_star} is not a nonnegative nonincreasing function")));
    }
    Ok(())
}

fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_negative() {
        return Err(Error::ParameterOutOfRange(format!("epsilon = {eps} must be nonnegative")));
    }
    Ok(())
}

fn indicator(v: &StepFunction, pred: impl Fn(&ExtScalar) -> bool) -> StepFunction {
    v.map(|x| if pred(x) { ExtScalar::one() } else { ExtScalar::zero() })
}

/// `x < (1+ε)^p·s` for rationals, with `p = a/q`: `x^q < (1+ε)^a·s^q`.
fn below_inflated(x: &Rational, s: &Rational, eps: &Rational, p: &Rational) -> bool {
    let a = p.numer().to_string().parse::<usize>().expect("exponent numerator fits");
    let q = p.denom().to_string().parse::<usize>().expect("exponent denominator fits");
    num_traits::pow(x.clone(), q) < num_traits::pow(Rational::one() + eps, a) * num_traits::pow(s.clone(), q)
}

/// Lays the pieces of `space` with positive measure out from 0, left to right;
/// the rest become null pieces.
fn tile_from_zero(v: &StepFunction, space: &WeightedSpace, block: &Rational) -> Result<MPTransform> {
    let pieces = split_unbounded(measured_pieces(v, space)?);
    let (live, null): (Vec<_>, Vec<_>) = pieces.into_iter().partition(|p| !p.measure.is_zero());
    let mut placed = tile_pieces(&live, &Rational::zero(), block);
    placed.extend(null.iter().map(|p| (p.interval.clone(), null_piece(p))));
    placed.sort_by(|a, b| source_order(&a.0, &b.0));
    Ok(MPTransform::new(placed.into_iter().map(|(_, p)| p).collect()))
}

fn interleave_block(h: &StepFunction) -> Rational {
    h.breaks().last().cloned().unwrap_or_else(Rational::one).max(Rational::one())
}

fn finish(
    f: StepFunction,
    g_star: &StepFunction,
    space: &WeightedSpace,
    v: &StepFunction,
    lambda: Real,
    upper_bound: Real,
    p: &Rational,
    eps: &Rational,
    case_tag: CaseTag,
    sigma_valid: bool,
) -> Result<WitnessReport> {
    let g_space = WeightedSpace::lebesgue(g_star.domain().clone());
    let equimeasurable_with_g = equimeasurable(&f, space, g_star, &g_space)?;
    let lp = weighted_lp_integral(&f, space, v, p)?;
    let sandwich_holds = lambda.possibly_le(&lp) && lp.possibly_le(&upper_bound);
    Ok(WitnessReport {
        equimeasurable_with_g,
        lambda_norm: lambda.pow(&p.recip()),
        lp_norm: lp.pow(&p.recip()),
        lambda_integral: lambda,
        lp_integral: lp,
        upper_bound,
        epsilon_used: eps.clone(),
        case_tag,
        sandwich_holds,
        sigma_valid,
        f,
    })
}

/// Whether `ε = 0` may be used: a Ryff condition holds or `μ(R) < ∞`.
pub fn epsilon_zero_eligible(instance: &HullInstance) -> Result<bool> {
    Ok(instance.space().total_measure().is_finite()
        || !matches!(ryff_conditions(instance.v(), instance.space())?, RyffVerdict::Neither { .. }))
}

/// Builds `f` equimeasurable with `g*` and `Λ ≤ ∫ f^p v dμ ≤ (1+ε)^p Λ`:
/// `g*∘σ₁` on `{v < S}`, `g*(κ_v(S) + σ₂)` on `{S ≤ v < (1+ε)^p S}`, 0 elsewhere.
pub fn hull_witness(g_star: &StepFunction, instance: &HullInstance, eps: &Rational) -> Result<WitnessReport> {
    if instance.vstar_is_zero() {
        return Err(Error::VstarIsZero);
    }
    check_epsilon(eps)?;
    let space = instance.space();
    let v = instance.v();
    let p = instance.p();
    let total = space.total_measure();
    check_g_star(g_star, &total)?;
    if eps.is_zero() && !epsilon_zero_eligible(instance)? {
        return Err(Error::EpsilonZeroNotAvailable);
    }
    let s = instance.s().expect_finite("S of a finite weight").clone();
    let kappa = instance.kappa_s().expect_finite("kappa of S").clone();
    let r1 = indicator(v, |x| x < &ExtScalar::Finite(s.clone()));
    let r2 = indicator(v, |x| {
        let x = x.expect_finite("finite weight");
        x == &s || (eps.is_positive() && x > &s && below_inflated(x, &s, eps, p))
    });
    let space1 = space.restrict_to(&r1)?;
    let space2 = space.restrict_to(&r2)?;
    let mut sigma_valid = true;

    let h = g_star.restrict(&Interval::new(Some(kappa.clone()), total.finite().cloned())?)?.shifted(&kappa);
    let sigma2 = tile_from_zero(v, &space2, &interleave_block(&h))?;
    sigma_valid &= verify_mpt(&sigma2, &space2);
    let mut f = r2.mul(&compose_with_rearrangement(&h, &sigma2)?)?;
    if kappa.is_positive() {
        let sigma1 = build_increasing_mpt(v, &space1)?;
        sigma_valid &= verify_mpt(&sigma1, &space1);
        f = f.add(&r1.mul(&compose_with_rearrangement(g_star, &sigma1)?)?)?;
    }

    let lambda = lambda_integral(g_star, instance.v_lowstar(), p)?;
    let upper = pow_rational(&(Rational::one() + eps), p).mul(&lambda);
    let tag = if eps.is_zero() { CaseTag::EpsilonZero } else { CaseTag::FiniteS };
    finish(f, g_star, space, v, lambda, upper, p, eps, tag, sigma_valid)
}

/// For `v_* ≡ 0`: a copy of `g*` laid on the zero set of `v`, where the norm vanishes.
pub fn hull_witness_degenerate(g_star: &StepFunction, instance: &HullInstance, eps: &Rational) -> Result<WitnessReport> {
    if !instance.vstar_is_zero() {
        return Err(Error::VstarNotZero);
    }
    if !eps.is_positive() {
        return Err(Error::ParameterOutOfRange(format!("epsilon = {eps} must be positive")));
    }
    let space = instance.space();
    let v = instance.v();
    let p = instance.p();
    check_g_star(g_star, &space.total_measure())?;
    if !g_star.is_finite_valued() {
        return Err(Error::InvalidStep(format!("{g_star} must be finite-valued")));
    }
    let zero_set = indicator(v, ExtScalar::is_zero);
    let on_zero = space.restrict_to(&zero_set)?;
    let sigma = tile_from_zero(v, &on_zero, &interleave_block(g_star))?;
    let sigma_valid = verify_mpt(&sigma, &on_zero);
    let f = zero_set.mul(&compose_with_rearrangement(g_star, &sigma)?)?;
    let bound = pow_rational(eps, p);
    finish(f, g_star, space, v, Real::zero(), bound, p, eps, CaseTag::VstarZero, sigma_valid)
}

/// For a power-tail weight decaying at infinity on `(0, ∞)`: each piece of
/// `g*` is placed far enough out that it contributes at most `ε^p 2^{−(k+1)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TailWitnessReport {
    pub witness: WitnessReport,
    /// `Σ c_k^p ℓ_k v(a_k)`, a closed-form bound on the norm.
    pub tail_bound: Real,
    /// Left endpoints `a_k` of the placed intervals.
    pub anchors: Vec<String>,
}

pub fn hull_witness_power_tail(
    g_star: &StepFunction,
    space: &WeightedSpace,
    v: &PowerTail,
    p: &Rational,
    eps: &Rational,
) -> Result<TailWitnessReport> {
    if !eps.is_positive() || !p.is_positive() {
        return Err(Error::ParameterOutOfRange(format!("need epsilon = {eps} > 0 and p = {p} > 0")));
    }
    if space.domain() != &Interval::half_line() {
        return Err(Error::DomainMismatch(space.domain().clone(), Interval::half_line()));
    }
    if g_star.domain().lower() != Some(&Rational::zero())
        || !g_star.is_nonincreasing()
        || !g_star.is_finite_valued()
        || g_star.values().iter().any(ExtScalar::is_negative)
    {
        return Err(Error::InvalidStep(format!("{g_star} is not a finite nonincreasing function on (0, M)")));
    }
    let density_tail = space.density().values().last().expect("nonempty").expect_finite("density").clone();
    let tail = v.tail();
    let decays = tail.term.is_zero() || tail.term.exponent.is_negative();
    if !density_tail.is_positive() || !decays || tail.term.coefficient.is_infinite() {
        return Err(Error::VstarNotZero);
    }
    let mut r0 = Rational::one();
    for b in space.density().breaks().iter().chain(v.breaks().iter()) {
        r0 = r0.max(b.clone());
    }
    let eps_p = pow_rational(eps, p);
    let eps_p_lo = eps_p.lo().expect_finite("epsilon power").clone();
    let c_hi = tail.term.coefficient.hi().expect_finite("tail coefficient").clone();
    let beta = -&tail.term.exponent;
    let m = beta.numer().to_string().parse::<usize>().unwrap_or(0);
    let n = beta.denom().to_string().parse::<usize>().expect("exponent denominator fits");
    let s = tail.term.scale.clone();

    let mut cursor = r0.clone();
    let mut segments: Vec<(ExtScalar, Option<Rational>)> = Vec::new();
    let mut anchors = Vec::new();
    let mut lp = Real::zero();
    let mut bound = Real::zero();
    let mut k = 0usize;
    for (piece, value) in g_star.pieces() {
        if value.is_zero() {
            continue;
        }
        let c_k = value.expect_finite("finite g*").clone();
        let ExtScalar::Finite(len) = piece.length() else {
            return Err(Error::UnboundedSupportPiece(c_k));
        };
        let ck_p = pow_rational(&c_k, p);
        // Upper bound on v(a)/θ_k with θ_k = ε^p/(2^{k+1} c_k^p ℓ_k).
        let q = &c_hi * num_traits::pow(Rational::from_integer(2.into()), k + 1) * ck_p.hi().expect_finite("c_k^p")
            * &len
            / &eps_p_lo;
        let q_n = num_traits::pow(q, n);
        let mut a = s.clone();
        let mut scale_pow = Rational::one();
        while a < cursor || (!tail.term.is_zero() && num_traits::pow(scale_pow.clone(), m) <= q_n) {
            a *= Rational::from_integer(2.into());
            scale_pow *= Rational::from_integer(2.into());
        }
        let end = &a + &len / &density_tail;
        let placed = Interval::bounded(a.clone(), end.clone())?;
        lp = lp.add(&ck_p.mul(&v.integral(&placed)?).scale(&density_tail));
        bound = bound.add(&ck_p.mul(&tail.term.eval(&a)).scale(&len));
        segments.push((ExtScalar::zero(), Some(a.clone())));
        segments.push((value.clone(), Some(end.clone())));
        anchors.push(format_rational(&a));
        cursor = end;
        k += 1;
    }
    segments.push((ExtScalar::zero(), None));
    let f = StepFunction::from_segments(Interval::half_line(), segments)?;
    let g_space = WeightedSpace::lebesgue(g_star.domain().clone());
    let equimeasurable_with_g = distribution(&f, space)? == distribution(g_star, &g_space)?;
    let sandwich_holds = lp.possibly_le(&bound) && bound.possibly_le(&eps_p);
    let witness = WitnessReport {
        f,
        equimeasurable_with_g,
        lambda_integral: Real::zero(),
        lambda_norm: Real::zero(),
        lp_norm: lp.pow(&p.recip()),
        lp_integral: lp,
        upper_bound: eps_p,
        epsilon_used: eps.clone(),
        case_tag: CaseTag::VstarZero,
        sandwich_holds,
        sigma_valid: true,
    };
    Ok(TailWitnessReport { witness, tail_bound: bound, anchors })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiCase {
    pub sample: usize,
    #[serde(with = "rational_serde")]
    pub epsilon: Rational,
    pub lower_bound_holds: bool,
    pub case_tag: Option<CaseTag>,
    /// Why no witness was built.
    pub skipped: Option<String>,
    pub equimeasurable: bool,
    pub sandwich_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiHullReport {
    pub cases: Vec<RiCase>,
    pub all_pass: bool,
}

/// Runs the lower bound and the applicable witness builder for every sample and `ε`.
pub fn ri_hull_verify(instance: &HullInstance, samples: &[StepFunction], epsilons: &[Rational]) -> Result<RiHullReport> {
    let space = instance.space();
    let mut cases = Vec::new();
    for (i, g) in samples.iter().enumerate() {
        let lower_bound_holds = hull_lower_bound(g, instance)?.holds;
        let g_star = decreasing_rearrangement(g, space)?;
        for eps in epsilons {
            let built = if instance.vstar_is_zero() {
                hull_witness_degenerate(&g_star, instance, eps)
            } else {
                hull_witness(&g_star, instance, eps)
            };
            let case = match built {
                Ok(w) => RiCase {
                    sample: i,
                    epsilon: eps.clone(),
                    lower_bound_holds,
                    case_tag: Some(w.case_tag),
                    skipped: None,
                    equimeasurable: w.equimeasurable_with_g && w.sigma_valid,
                    sandwich_holds: w.sandwich_holds,
                },
                Err(e @ (Error::EpsilonZeroNotAvailable | Error::ParameterOutOfRange(_))) => RiCase {
                    sample: i,
                    epsilon: eps.clone(),
                    lower_bound_holds,
                    case_tag: None,
                    skipped: Some(e.to_string()),
                    equimeasurable: true,
                    sandwich_holds: true,
                },
                Err(e) => return Err(e),
            };
            cases.push(case);
        }
    }
    let all_pass = cases.iter().all(|c| c.lower_bound_holds && c.equimeasurable && c.sandwich_holds);
    Ok(RiHullReport { cases, all_pass })
}
