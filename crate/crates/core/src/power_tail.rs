//! Weights on `(0, ∞)` made of finitely many monomial pieces `c·(t/s)^β`.
//!
//! Integrals are evaluated from closed-form antiderivatives (including the
//! logarithmic case `β = −1`). Coefficients are [`Real`] enclosures so that
//! powers of a weight stay representable; with rational data and integer
//! exponents everything is exact.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::real::{ln, pow_rational, Real};
use crate::scalar::{format_rational, rational_serde, rational_to_f64, ExtScalar, Rational};
use crate::step::StepFunction;

/// `coefficient · (t / scale)^exponent` for `t > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: Real,
    pub exponent: Rational,
    pub scale: Rational,
}

impl Monomial {
    pub fn new(coefficient: Rational, exponent: Rational) -> Self {
        Monomial { coefficient: Real::from_rational(coefficient), exponent, scale: Rational::one() }
    }

    pub fn constant(c: ExtScalar) -> Self {
        Monomial { coefficient: Real::exact(c), exponent: Rational::zero(), scale: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    pub fn eval(&self, t: &Rational) -> Real {
        if self.is_zero() {
            return Real::zero();
        }
        self.coefficient.mul(&pow_rational(&(t / &self.scale), &self.exponent))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.coefficient.to_f64() * (t / rational_to_f64(&self.scale)).powf(rational_to_f64(&self.exponent))
    }

    /// `(c·(t/s)^β)^γ = c^γ·(t/s)^{βγ}`.
    pub fn pow(&self, gamma: &Rational) -> Monomial {
        Monomial {
            coefficient: self.coefficient.pow(gamma),
            exponent: &self.exponent * gamma,
            scale: self.scale.clone(),
        }
    }
}

fn clamp_nonneg(r: Real) -> Real {
    if r.lo().is_negative() {
        Real::between(ExtScalar::zero(), r.hi().clone().max(ExtScalar::zero()))
    } else {
        r
    }
}

/// `∫_I c·(t/s)^β dt` over `I ⊆ (0, ∞)`; `+∞` for divergent integrals.
pub fn monomial_integrate(term: &Monomial, interval: &Interval) -> Result<Real> {
    let a = interval.lower().cloned().unwrap_or_else(Rational::zero);
    if a.is_negative() {
        return Err(Error::InvalidInterval(format!("{interval} is not inside (0, inf)")));
    }
    if term.is_zero() {
        return Ok(Real::zero());
    }
    if term.coefficient.is_infinite() {
        return Ok(Real::infinity());
    }
    let s = &term.scale;
    let e = &term.exponent + Rational::one();
    let b = interval.upper();
    let value = if e.is_zero() {
        let Some(b) = b else { return Ok(Real::infinity()) };
        if a.is_zero() {
            return Ok(Real::infinity());
        }
        ln(&(b / &a)).scale(s)
    } else if e.is_positive() {
        let Some(b) = b else { return Ok(Real::infinity()) };
        let upper = pow_rational(&(b / s), &e);
        let lower = if a.is_zero() { Real::zero() } else { pow_rational(&(&a / s), &e) };
        upper.sub(&lower).scale(&(s / &e))
    } else {
        if a.is_zero() {
            return Ok(Real::infinity());
        }
        let upper = match b {
            Some(b) => pow_rational(&(b / s), &e),
            None => Real::zero(),
        };
        pow_rational(&(&a / s), &e).sub(&upper).scale(&(s / -&e))
    };
    Ok(clamp_nonneg(term.coefficient.mul(&clamp_nonneg(value))))
}

/// `∫_a^b c·(t/s)^β·t^γ dt` in floating point; `b` may be infinite.
pub fn monomial_integrate_f64(term: &Monomial, a: f64, b: f64, gamma: f64) -> f64 {
    if term.is_zero() || a >= b {
        return 0.0;
    }
    let s = rational_to_f64(&term.scale);
    let beta = rational_to_f64(&term.exponent);
    // c·s^{-β}·∫ t^{β+γ} dt
    let c = term.coefficient.to_f64() * s.powf(-beta);
    let e = beta + gamma + 1.0;
    if e.abs() < 1e-300 {
        if a == 0.0 || b.is_infinite() {
            return f64::INFINITY;
        }
        return c * (b / a).ln();
    }
    let at = |t: f64| -> f64 {
        if t == 0.0 {
            if e > 0.0 { 0.0 } else { f64::INFINITY }
        } else if t.is_infinite() {
            if e > 0.0 { f64::INFINITY } else { 0.0 }
        } else {
            t.powf(e)
        }
    };
    let (hi, lo) = (at(b), at(a));
    if hi.is_infinite() || lo.is_infinite() {
        return f64::INFINITY;
    }
    c * (hi - lo) / e
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailPiece {
    pub interval: Interval,
    pub term: Monomial,
}

/// A weight on `(0, ∞)`: monomial pieces on consecutive intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerTail {
    pieces: Vec<TailPiece>,
}

impl PowerTail {
    pub fn new(pieces: Vec<TailPiece>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidStep(format!("power tail: {msg}")));
        let Some(first) = pieces.first() else { return bad("no pieces".into()) };
        if first.interval.lower() != Some(&Rational::zero()) {
            return bad(format!("first piece {} does not start at 0", first.interval));
        }
        for w in pieces.windows(2) {
            if w[0].interval.upper().is_none() || w[0].interval.upper() != w[1].interval.lower() {
                return bad(format!("pieces {} and {} are not adjacent", w[0].interval, w[1].interval));
            }
        }
        if pieces.last().is_some_and(|p| p.interval.upper().is_some()) {
            return bad("last piece must be unbounded".into());
        }
        for p in &pieces {
            if p.term.coefficient.lo().is_negative() || !p.term.scale.is_positive() {
                return bad(format!("negative coefficient or nonpositive scale on {}", p.interval));
            }
        }
        Ok(PowerTail { pieces })
    }

    /// `c·t^β` on all of `(0, ∞)`.
    pub fn monomial(c: Rational, beta: Rational) -> Self {
        PowerTail { pieces: vec![TailPiece { interval: Interval::half_line(), term: Monomial::new(c, beta) }] }
    }

    /// A step function on `(0, ∞)` viewed as a weight.
    pub fn from_step(step: &StepFunction) -> Result<Self> {
        if step.domain() != &Interval::half_line() {
            return Err(Error::DomainMismatch(step.domain().clone(), Interval::half_line()));
        }
        PowerTail::new(
            step.pieces().map(|(interval, v)| TailPiece { interval, term: Monomial::constant(v.clone()) }).collect(),
        )
    }

    pub fn pieces(&self) -> &[TailPiece] {
        &self.pieces
    }

    pub fn first(&self) -> &TailPiece {
        &self.pieces[0]
    }

    pub fn tail(&self) -> &TailPiece {
        self.pieces.last().expect("nonempty")
    }

    /// Interior breakpoints.
    pub fn breaks(&self) -> Vec<Rational> {
        self.pieces[1..].iter().map(|p| p.interval.lower().expect("interior").clone()).collect()
    }

    pub fn eval(&self, t: &Rational) -> Real {
        self.pieces
            .iter()
            .find(|p| p.interval.contains_interior(t) || p.interval.lower() == Some(t))
            .map_or(Real::zero(), |p| p.term.eval(t))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let i = self
            .pieces
            .iter()
            .position(|p| p.interval.upper().is_none_or(|b| t < rational_to_f64(b)))
            .unwrap_or(self.pieces.len() - 1);
        self.pieces[i].term.eval_f64(t)
    }

    /// `∫_I w(t) dt` for `I ⊆ (0, ∞)`.
    pub fn integral(&self, interval: &Interval) -> Result<Real> {
        let mut total = Real::zero();
        for p in &self.pieces {
            if let Some(common) = p.interval.intersect(interval) {
                total = total.add(&monomial_integrate(&p.term, &common)?);
            }
        }
        Ok(total)
    }

    /// `∫_a^b w(t)·t^γ dt` in floating point.
    pub fn integral_f64(&self, a: f64, b: f64, gamma: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.pieces {
            let lo = p.interval.lower().map_or(0.0, rational_to_f64).max(a);
            let hi = p.interval.upper().map_or(f64::INFINITY, rational_to_f64).min(b);
            if lo < hi {
                total += monomial_integrate_f64(&p.term, lo, hi, gamma);
            }
        }
        total
    }

    /// `w^γ` piece by piece.
    pub fn pow(&self, gamma: &Rational) -> PowerTail {
        PowerTail {
            pieces: self
                .pieces
                .iter()
                .map(|p| TailPiece { interval: p.interval.clone(), term: p.term.pow(gamma) })
                .collect(),
        }
    }

    /// Nondecreasing on `(0, ∞)`: each piece is constant or increasing, and no
    /// piece boundary jumps down.
    pub fn is_nondecreasing(&self) -> bool {
        let pieces_ok = self
            .pieces
            .iter()
            .all(|p| p.term.is_zero() || !p.term.exponent.is_negative());
        let joins_ok = self.pieces.windows(2).all(|w| {
            let t = w[0].interval.upper().expect("interior");
            w[0].term.eval(t).possibly_le(&w[1].term.eval(t))
        });
        pieces_ok && joins_ok
    }

    /// `∫_0^{M} g*(t)^p w(t) dt` for a step function `g*` on `(0, M)`.
    pub fn lambda_integral(&self, g_star: &StepFunction, p: &Rational) -> Result<Real> {
        let mut total = Real::zero();
        for (piece, value) in g_star.pieces() {
            if value.is_zero() {
                continue;
            }
            let weight = self.integral(&piece)?;
            total = total.add(&Real::exact(value.clone()).pow(p).mul(&weight));
        }
        Ok(total)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceRepr {
    interval: Interval,
    coefficient: ExtScalar,
    #[serde(with = "rational_serde")]
    exponent: Rational,
    #[serde(default = "Rational::one", with = "rational_serde", skip_serializing_if = "Rational::is_one")]
    scale: Rational,
}

/// Serialized as a list of `{interval, coefficient, exponent[, scale]}`; only
/// exact coefficients are representable.
impl Serialize for PowerTail {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let reprs: std::result::Result<Vec<PieceRepr>, S::Error> = self
            .pieces
            .iter()
            .map(|p| {
                let coefficient = p.term.coefficient.exact_value().cloned().ok_or_else(|| {
                    serde::ser::Error::custom(format!("inexact coefficient on {}", p.interval))
                })?;
                Ok(PieceRepr {
                    interval: p.interval.clone(),
                    coefficient,
                    exponent: p.term.exponent.clone(),
                    scale: p.term.scale.clone(),
                })
            })
            .collect();
        reprs?.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PowerTail {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let reprs = Vec::<PieceRepr>::deserialize(deserializer)?;
        let pieces = reprs
            .into_iter()
            .map(|r| TailPiece {
                interval: r.interval,
                term: Monomial { coefficient: Real::exact(r.coefficient), exponent: r.exponent, scale: r.scale },
            })
            .collect();
        PowerTail::new(pieces).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}·(t/{})^{}", self.coefficient, format_rational(&self.scale), format_rational(&self.exponent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn on(a: i64, b: Option<i64>) -> Interval {
        Interval::new(Some(int(a)), b.map(int)).unwrap()
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(monomial_integrate(&Monomial::new(int(1), int(0)), &on(0, Some(1))).unwrap(), Real::one());
        assert_eq!(monomial_integrate(&Monomial::new(int(1), int(-2)), &on(1, None)).unwrap(), Real::one());
        assert_eq!(monomial_integrate(&Monomial::new(int(1), int(-1)), &on(1, None)).unwrap(), Real::infinity());
        assert_eq!(monomial_integrate(&Monomial::new(int(1), int(-1)), &on(0, Some(1))).unwrap(), Real::infinity());
        assert_eq!(monomial_integrate(&Monomial::new(int(1), int(2)), &on(1, None)).unwrap(), Real::infinity());
        assert_eq!(
            monomial_integrate(&Monomial::new(int(1), rat(-1, 2)), &on(0, Some(1))).unwrap(),
            Real::from(int(2))
        );
        assert_eq!(monomial_integrate(&Monomial::new(int(3), int(2)), &on(1, Some(2))).unwrap(), Real::from(int(7)));
    }

    #[test]
    fn logarithmic_case_encloses_ln2() {
        let r = monomial_integrate(&Monomial::new(int(1), int(-1)), &on(1, Some(2))).unwrap();
        assert!(!r.is_exact());
        assert!(r.relative_width() < 1e-50);
        assert!((r.to_f64() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn scaled_monomials_stay_exact() {
        let half = Monomial { coefficient: Real::one(), exponent: int(2), scale: int(2) };
        assert_eq!(half.eval(&int(4)), Real::from(int(4)));
        // ∫_0^2 (t/2)^2 dt = 2/3
        assert_eq!(monomial_integrate(&half, &on(0, Some(2))).unwrap(), Real::from(rat(2, 3)));
    }

    #[test]
    fn powers_and_monotonicity() {
        let w = PowerTail::monomial(int(4), int(1));
        assert!(w.is_nondecreasing());
        let u = w.pow(&rat(-1, 2));
        assert_eq!(u.eval(&int(4)), Real::from(rat(1, 4)));
        assert!(!u.is_nondecreasing());
        let step = StepFunction::new(Interval::half_line(), vec![int(1)], vec![1.into(), 0.into()]).unwrap();
        let chi = PowerTail::from_step(&step).unwrap();
        assert!(!chi.is_nondecreasing());
        assert_eq!(chi.integral(&Interval::half_line()).unwrap(), Real::one());
        assert!((chi.integral_f64(0.5, f64::INFINITY, -2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_integral_of_indicator() {
        let g = StepFunction::new(Interval::bounded(int(0), int(2)).unwrap(), vec![int(1)], vec![1.into(), 0.into()])
            .unwrap();
        let w = PowerTail::monomial(int(1), int(1));
        assert_eq!(w.lambda_integral(&g, &int(3)).unwrap(), Real::from(rat(1, 2)));
    }

    #[test]
    fn serde_round_trip() {
        let text = r#"[{"interval":["0","1"],"coefficient":"1","exponent":"0"},{"interval":["1","inf"],"coefficient":"1","exponent":"-1","scale":"2"}]"#;
        let w: PowerTail = serde_json::from_str(text).unwrap();
        assert_eq!(serde_json::to_string(&w).unwrap(), text);
        assert!(serde_json::from_str::<PowerTail>(r#"[{"interval":["1","inf"],"coefficient":"1","exponent":"0"}]"#).is_err());
    }
}
