//! The `B_p` condition `∫_r^∞ w(t)/t^p dt ≤ C·r^{−p}∫_0^r w(t) dt` for weights
//! on `(0, ∞)` built from monomial pieces.
//!
//! On the first and last pieces the ratio `r^p·L(r)/W(r)` is monotone in `r`,
//! so its supremum there is an endpoint value or a closed-form limit. Between
//! interior breakpoints the supremum is bracketed by branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::embedding::l1_plus_linf_norm;
use crate::error::{Error, Result};
use crate::hull::{hull_lower_bound, HullInstance};
use crate::inequalities::InequalityReport;
use crate::interval::Interval;
use crate::power_tail::{Monomial, PowerTail, TailPiece};
use crate::real::{pow_rational, Real};
use crate::scalar::{format_rational, rational_from_f64, rational_serde, rational_to_f64, ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

/// Exponents that decide finiteness of the constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsymptoticExponents {
    /// Exponent of the first nonvanishing piece at 0.
    pub near_zero: Option<String>,
    /// Exponent of the tail piece, absent when the tail vanishes.
    pub near_infinity: Option<String>,
    /// `p − 1`; both exponents must lie strictly below it.
    pub critical: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BpReport {
    pub in_class: bool,
    /// The least admissible `C`, infinite outside the class.
    pub constant_c: Real,
    /// Regime boundaries where the ratio was evaluated.
    pub checked_grid: Vec<String>,
    pub asymptotic_exponents: AsymptoticExponents,
}

/// `c·(t/s)^β·t^γ = (c·s^γ)·(t/s)^{β+γ}`.
fn times_power(term: &Monomial, gamma: &Rational) -> Monomial {
    Monomial {
        coefficient: term.coefficient.mul(&pow_rational(&term.scale, gamma)),
        exponent: &term.exponent + gamma,
        scale: term.scale.clone(),
    }
}

fn scaled_weight(w: &PowerTail, gamma: &Rational) -> PowerTail {
    let pieces = w
        .pieces()
        .iter()
        .map(|p| TailPiece { interval: p.interval.clone(), term: times_power(&p.term, gamma) })
        .collect();
    PowerTail::new(pieces).expect("same layout")
}

/// `r^p·∫_r^∞ w/t^p dt / ∫_0^r w dt`, the ratio bounded by `C`.
pub fn bp_ratio(w: &PowerTail, p: &Rational, r: &Rational) -> Result<Real> {
    let tail = scaled_weight(w, &-p).integral(&Interval::new(Some(r.clone()), None)?)?;
    let head = w.integral(&Interval::bounded(Rational::zero(), r.clone())?)?;
    Ok(pow_rational(r, p).mul(&tail).div(&head))
}

fn ratio_f64(w: &PowerTail, p: f64, r: f64) -> f64 {
    w.integral_f64(r, f64::INFINITY, -p) * r.powf(p) / w.integral_f64(0.0, r, 0.0)
}

struct Cell {
    upper: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

/// Encloses `sup_{a<r<b} ratio(r)` for `0 < a < b < ∞` by branch and bound,
/// using `L(x)·y^p/W(x)` as the bound on `[x, y]`.
fn middle_supremum(w: &PowerTail, p: f64, a: f64, b: f64) -> (f64, f64) {
    let bound = |x: f64, y: f64| w.integral_f64(x, f64::INFINITY, -p) * y.powf(p) / w.integral_f64(0.0, x, 0.0);
    let mut best = ratio_f64(w, p, a).max(ratio_f64(w, p, b));
    let mut heap = BinaryHeap::new();
    heap.push(Cell { upper: bound(a, b), a, b });
    for _ in 0..20_000 {
        let Some(top) = heap.peek() else { break };
        if top.upper <= best * (1.0 + 1e-11) {
            break;
        }
        let cell = heap.pop().expect("peeked");
        let mid = (cell.a * cell.b).sqrt();
        best = best.max(ratio_f64(w, p, mid));
        heap.push(Cell { upper: bound(cell.a, mid), a: cell.a, b: mid });
        heap.push(Cell { upper: bound(mid, cell.b), a: mid, b: cell.b });
    }
    let upper = heap.peek().map_or(best, |c| c.upper.max(best));
    (best, upper)
}

fn enclose_f64(lo: f64, hi: f64) -> Real {
    let lo = rational_from_f64((lo * (1.0 - 1e-12)).max(0.0));
    let hi = rational_from_f64(hi * (1.0 + 1e-12));
    Real::between(ExtScalar::Finite(lo), ExtScalar::Finite(hi))
}

/// `(α+1)/(p−1−α)`: the ratio for `w = t^α`, and its limits at 0 and ∞.
fn monomial_constant(alpha: &Rational, p: &Rational) -> Rational {
    (alpha + Rational::one()) / (p - Rational::one() - alpha)
}

/// Decides `w ∈ B_p` and computes the least constant.
pub fn bp_check(w: &PowerTail, p: &Rational) -> Result<BpReport> {
    if !p.is_positive() {
        return Err(Error::ParameterOutOfRange(format!("p = {p} must be positive")));
    }
    if let Some(piece) = w.pieces().iter().find(|t| t.term.coefficient.is_infinite()) {
        return Err(Error::NonIntegrableWeight(format!("infinite weight on {}", piece.interval)));
    }
    let critical = p - Rational::one();
    let first = w.first();
    let tail = w.tail();
    if !first.term.is_zero() && first.term.exponent <= -Rational::one() {
        return Err(Error::NonIntegrableWeight(format!(
            "exponent {} on {}",
            format_rational(&first.term.exponent),
            first.interval
        )));
    }
    let exponents = AsymptoticExponents {
        near_zero: w.pieces().iter().find(|t| !t.term.is_zero()).map(|t| format_rational(&t.term.exponent)),
        near_infinity: (!tail.term.is_zero()).then(|| format_rational(&tail.term.exponent)),
        critical: format_rational(&critical),
    };
    let breaks = w.breaks();
    let report = |in_class: bool, constant_c: Real, exponents: AsymptoticExponents| BpReport {
        in_class,
        constant_c,
        checked_grid: breaks.iter().map(format_rational).collect(),
        asymptotic_exponents: exponents,
    };
    if w.pieces().iter().all(|t| t.term.is_zero()) {
        return Ok(report(true, Real::zero(), exponents));
    }
    // A vanishing initial segment leaves `W(r) = 0 < L(r)` for small `r`.
    let diverges = first.term.is_zero()
        || first.term.exponent >= critical
        || (!tail.term.is_zero() && tail.term.exponent >= critical);
    if diverges {
        return Ok(report(false, Real::infinity(), exponents));
    }
    let near_zero = Real::from_rational(monomial_constant(&first.term.exponent, p));
    if breaks.is_empty() {
        return Ok(report(true, near_zero, exponents));
    }
    let mut c = near_zero;
    for r in &breaks {
        c = c.max(&bp_ratio(w, p, r)?);
    }
    if !tail.term.is_zero() && tail.term.exponent > -Rational::one() {
        c = c.max(&Real::from_rational(monomial_constant(&tail.term.exponent, p)));
    }
    let pf = rational_to_f64(p);
    for pair in breaks.windows(2) {
        let (lo, hi) = middle_supremum(w, pf, rational_to_f64(&pair[0]), rational_to_f64(&pair[1]));
        c = c.max(&enclose_f64(lo, hi));
    }
    Ok(report(true, c, exponents))
}

/// `v_*` for `v(x) = |x|^α` on Lebesgue `ℝ`: `(t/2)^α`.
pub fn power_weight_rearrangement(alpha: &Rational) -> Result<PowerTail> {
    if alpha.is_negative() {
        return Err(Error::ParameterOutOfRange(format!("alpha = {alpha} must be nonnegative")));
    }
    let term = Monomial {
        coefficient: Real::one(),
        exponent: alpha.clone(),
        scale: if alpha.is_zero() { Rational::one() } else { Rational::from_integer(2.into()) },
    };
    PowerTail::new(vec![TailPiece { interval: Interval::half_line(), term }])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LorentzIdentityReport {
    #[serde(with = "rational_serde")]
    pub q: Rational,
    /// `p/q − 1 = α`.
    pub exponents_agree: bool,
    /// `∫ g*^p t^α dt`.
    pub lambda: Real,
    /// `∫ g*^p t^{p/q−1} dt`.
    pub lorentz: Real,
    pub integrals_equal: bool,
    /// `∫ g*^p (t/2)^α dt`.
    pub scaled: Real,
    pub scaling_holds: bool,
    pub holds: bool,
}

/// `Λ^p(t^α) = L^{q,p}` with `q = p/(α+1)`, and `Λ^p((t/2)^α) = 2^{−α}Λ^p(t^α)`.
pub fn classical_lorentz_identity_check(
    g_star: &StepFunction,
    alpha: &Rational,
    p: &Rational,
) -> Result<LorentzIdentityReport> {
    if alpha.is_negative() || alpha >= &(p - Rational::one()) {
        return Err(Error::ParameterOutOfRange(format!("need 0 <= alpha = {alpha} < p - 1 = {}", p - Rational::one())));
    }
    if g_star.domain().lower() != Some(&Rational::zero()) {
        return Err(Error::DomainMismatch(g_star.domain().clone(), Interval::half_line()));
    }
    let q = p / (alpha + Rational::one());
    let lorentz_exponent = p / &q - Rational::one();
    let lambda = PowerTail::monomial(Rational::one(), alpha.clone()).lambda_integral(g_star, p)?;
    let lorentz = PowerTail::monomial(Rational::one(), lorentz_exponent.clone()).lambda_integral(g_star, p)?;
    let scaled = power_weight_rearrangement(alpha)?.lambda_integral(g_star, p)?;
    let expected = pow_rational(&Rational::from_integer(2.into()), &-alpha).mul(&lambda);
    let exponents_agree = &lorentz_exponent == alpha;
    let integrals_equal = lambda == lorentz;
    let scaling_holds = scaled.overlaps(&expected);
    Ok(LorentzIdentityReport {
        q,
        exponents_agree,
        lambda,
        lorentz,
        integrals_equal,
        scaled,
        scaling_holds,
        holds: exponents_agree && integrals_equal && scaling_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionSample {
    /// `Λ^p(v_*) ≤ L^p(v)`.
    pub first: InequalityReport,
    pub lambda_finite: bool,
    pub l1_plus_linf: ExtScalar,
    /// A finite `Λ^p` functional forces a finite `L¹+L∞` norm.
    pub second_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionChainReport {
    pub bp: BpReport,
    pub samples: Vec<InclusionSample>,
    pub all_hold: bool,
}

/// Checks `L^p(v) ⊂ Λ^p(v_*) ⊂ L¹+L∞` on samples, for `v_* ∈ B_p`.
pub fn bp_implies_banach_chain_check(
    space: &WeightedSpace,
    v: &StepFunction,
    p: &Rational,
    samples: &[StepFunction],
) -> Result<InclusionChainReport> {
    if p <= &Rational::one() {
        return Err(Error::ParameterOutOfRange(format!("p = {p} must exceed 1")));
    }
    let instance = HullInstance::new(space.clone(), v.clone(), p.clone())?;
    let bp = bp_check(&instance.lorentz_weight()?, p)?;
    if !bp.in_class {
        return Err(Error::NotInBp(format!("B_p constant {}", bp.constant_c)));
    }
    let mut out = Vec::with_capacity(samples.len());
    for f in samples {
        let first = hull_lower_bound(f, &instance)?;
        let lambda_finite = first.lhs.is_finite();
        let l1_plus_linf = l1_plus_linf_norm(f, space)?;
        let second_holds = !lambda_finite || l1_plus_linf.is_finite();
        out.push(InclusionSample { first, lambda_finite, l1_plus_linf, second_holds });
    }
    Ok(InclusionChainReport {
        all_hold: out.iter().all(|s| s.first.holds && s.second_holds),
        samples: out,
        bp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn step_weight(breaks: Vec<Rational>, values: Vec<ExtScalar>) -> PowerTail {
        PowerTail::from_step(&StepFunction::new(Interval::half_line(), breaks, values).unwrap()).unwrap()
    }

    #[test]
    fn power_weight_grid() {
        let alphas = [int(0), rat(1, 4), rat(1, 2), int(1), rat(3, 2), int(2)];
        for p in [rat(3, 2), int(2), int(3)] {
            for alpha in &alphas {
                let r = bp_check(&PowerTail::monomial(int(1), alpha.clone()), &p).unwrap();
                assert_eq!(r.in_class, alpha < &(&p - int(1)), "alpha {alpha}, p {p}");
                assert_eq!(r.in_class, r.constant_c.is_finite());
                if r.in_class {
                    let expected = (alpha + int(1)) / (&p - int(1) - alpha);
                    assert_eq!(r.constant_c, Real::from(expected));
                }
            }
        }
        let r = bp_check(&PowerTail::monomial(int(1), int(0)), &int(2)).unwrap();
        assert_eq!(r.constant_c, Real::one());
    }

    #[test]
    fn indicator_weight() {
        let w = step_weight(vec![int(1)], vec![1.into(), 0.into()]);
        let r = bp_check(&w, &int(2)).unwrap();
        assert!(r.in_class);
        // ratio = 1 − r on (0, 1), 0 beyond
        assert_eq!(r.constant_c, Real::one());
        assert_eq!(bp_ratio(&w, &int(2), &rat(1, 4)).unwrap(), Real::from(rat(3, 4)));
    }

    #[test]
    fn degenerate_weights() {
        let zero = step_weight(vec![], vec![0.into()]);
        assert_eq!(bp_check(&zero, &int(2)).unwrap().constant_c, Real::zero());
        let late = step_weight(vec![int(1)], vec![0.into(), 1.into()]);
        let r = bp_check(&late, &int(2)).unwrap();
        assert!(!r.in_class && r.constant_c.is_infinite());
        let singular = PowerTail::monomial(int(1), int(-1));
        assert!(matches!(bp_check(&singular, &int(2)), Err(Error::NonIntegrableWeight(_))));
    }

    #[test]
    fn middle_regimes_bound_the_ratio() {
        let w = step_weight(vec![int(1), int(2), int(5)], vec![1.into(), 4.into(), 1.into(), 2.into()]);
        let r = bp_check(&w, &int(3)).unwrap();
        assert!(r.in_class);
        for k in 1..200 {
            let t = rat(k, 20);
            let ratio = bp_ratio(&w, &int(3), &t).unwrap();
            assert!(ratio.possibly_le(&r.constant_c), "r = {t}: {ratio} > {}", r.constant_c);
        }
    }

    #[test]
    fn power_rearrangement_examples() {
        let one = power_weight_rearrangement(&int(0)).unwrap();
        assert_eq!(one.eval(&int(7)), Real::one());
        let lin = power_weight_rearrangement(&int(1)).unwrap();
        assert_eq!(lin.eval(&int(3)), Real::from(rat(3, 2)));
        let sq = power_weight_rearrangement(&int(2)).unwrap();
        assert_eq!(sq.eval(&int(3)), Real::from(rat(9, 4)));
        assert!(power_weight_rearrangement(&int(-1)).is_err());
    }

    #[test]
    fn lorentz_identity_examples() {
        let g = StepFunction::constant(Interval::bounded(int(0), int(1)).unwrap(), 1.into());
        let r = classical_lorentz_identity_check(&g, &int(1), &int(3)).unwrap();
        assert_eq!(r.q, rat(3, 2));
        assert_eq!(r.lambda, Real::from(rat(1, 2)));
        assert!(r.holds);
        let r = classical_lorentz_identity_check(&g, &int(0), &int(2)).unwrap();
        assert_eq!(r.q, int(2));
        assert!(r.holds);
        let zero = StepFunction::zero(Interval::half_line());
        let r = classical_lorentz_identity_check(&zero, &rat(1, 2), &int(2)).unwrap();
        assert!(r.lambda.is_zero() && r.holds);
        assert!(matches!(
            classical_lorentz_identity_check(&g, &int(2), &int(2)),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn inclusion_chain_constant_weight() {
        let space = WeightedSpace::lebesgue(Interval::half_line());
        let v = StepFunction::constant(Interval::half_line(), 1.into());
        let samples = vec![
            StepFunction::new(Interval::half_line(), vec![int(1), int(3)], vec![3.into(), 1.into(), 0.into()]).unwrap(),
            StepFunction::constant(Interval::half_line(), 1.into()),
            StepFunction::zero(Interval::half_line()),
        ];
        let r = bp_implies_banach_chain_check(&space, &v, &int(2), &samples).unwrap();
        assert!(r.all_hold);
        assert!(!r.samples[1].lambda_finite);
        // Cauchy–Schwarz: ∫_0^1 f* ≤ (∫ f*²)^{1/2}
        let s = &r.samples[0];
        assert!(Real::exact(s.l1_plus_linf.clone()).pow(&int(2)).possibly_le(&s.first.lhs));
    }
}
