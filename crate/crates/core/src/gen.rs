//! Seeded random instances for property campaigns.
//!
//! Step functions have at most 8 pieces; values are nonnegative rationals with
//! numerator and denominator at most 1000, drawn a third of the time from a
//! small pool so that ties between pieces are common. Domains are finite,
//! half-infinite or the whole line with equal probability.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::TwoMeasures;
use crate::interval::Interval;
use crate::scalar::{ExtScalar, Rational};
use crate::space::WeightedSpace;
use crate::step::StepFunction;

pub const MAX_PIECES: usize = 8;
pub const MAX_TERM: i64 = 1000;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Instance source for case `index` of a campaign with `seed`.
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Generator { rng }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items.choose(&mut self.rng).expect("nonempty").clone()
    }

    /// `n/d` with `0 ≤ n ≤ 1000`, `1 ≤ d ≤ 1000`.
    pub fn rational(&mut self) -> Rational {
        r(self.rng.gen_range(0..=MAX_TERM), self.rng.gen_range(1..=MAX_TERM))
    }

    pub fn positive_rational(&mut self) -> Rational {
        r(self.rng.gen_range(1..=MAX_TERM), self.rng.gen_range(1..=MAX_TERM))
    }

    pub fn value(&mut self) -> Rational {
        if self.chance(1.0 / 3.0) {
            self.pick(&[r(0, 1), r(1, 2), r(1, 1), r(2, 1), r(3, 1)])
        } else {
            self.rational()
        }
    }

    pub fn positive_value(&mut self) -> Rational {
        if self.chance(1.0 / 3.0) {
            self.pick(&[r(1, 2), r(1, 1), r(2, 1)])
        } else {
            self.positive_rational()
        }
    }

    /// A short offset in `(0, 10]` with a small denominator.
    fn offset(&mut self) -> Rational {
        let d = self.pick(&[1, 2, 3, 4, 5, 8, 10]);
        r(self.rng.gen_range(1..=10 * d), d)
    }

    pub fn domain(&mut self) -> Interval {
        let a = r(self.rng.gen_range(-5..=5), 1);
        match self.rng.gen_range(0..4) {
            0 => {
                let b = &a + self.offset();
                Interval::bounded(a, b).expect("ordered")
            }
            1 => Interval::new(Some(a), None).expect("half line"),
            2 => Interval::new(None, Some(a)).expect("half line"),
            _ => Interval::real_line(),
        }
    }

    /// Up to `k` distinct sorted points strictly inside `domain`.
    pub fn breaks_in(&mut self, domain: &Interval, k: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let x = match (domain.lower(), domain.upper()) {
                (Some(a), Some(b)) => {
                    let d = self.rng.gen_range(2..=12);
                    let n = self.rng.gen_range(1..d);
                    a + (b - a) * r(n, d)
                }
                (Some(a), None) => a + self.offset(),
                (None, Some(b)) => b - self.offset(),
                (None, None) => {
                    let o = self.offset();
                    if self.chance(0.5) {
                        o
                    } else {
                        -o + Rational::one()
                    }
                }
            };
            out.push(x);
        }
        out.sort();
        out.dedup();
        out
    }

    /// A step function on `domain` whose values come from `value`.
    pub fn step_with(&mut self, domain: &Interval, mut value: impl FnMut(&mut Self) -> Rational) -> StepFunction {
        let k = self.rng.gen_range(0..MAX_PIECES);
        let breaks = self.breaks_in(domain, k);
        let values = (0..=breaks.len()).map(|_| ExtScalar::Finite(value(self))).collect();
        StepFunction::new(domain.clone(), breaks, values).expect("valid step data")
    }

    pub fn step(&mut self, domain: &Interval) -> StepFunction {
        self.step_with(domain, Self::value)
    }

    /// A density with at least one positive piece; a fifth of pieces vanish.
    pub fn density(&mut self, domain: &Interval) -> StepFunction {
        loop {
            let d = self.step_with(domain, |g| if g.chance(0.2) { Rational::zero() } else { g.positive_value() });
            if !d.is_zero() {
                return d;
            }
        }
    }

    pub fn space_on(&mut self, domain: &Interval) -> WeightedSpace {
        if self.chance(0.25) {
            WeightedSpace::lebesgue(domain.clone())
        } else {
            WeightedSpace::new(self.density(domain)).expect("finite density")
        }
    }

    pub fn space(&mut self) -> WeightedSpace {
        let domain = self.domain();
        self.space_on(&domain)
    }

    /// A nonnegative function that is `≥ f` everywhere.
    pub fn dominating(&mut self, f: &StepFunction) -> StepFunction {
        let bump = self.step(f.domain());
        f.add(&bump).expect("same domain")
    }

    /// A nonincreasing finite step function on `(0, end)`.
    pub fn nonincreasing(&mut self, end: &ExtScalar) -> StepFunction {
        let domain = Interval::from_zero(end).expect("positive end");
        let k = self.rng.gen_range(0..MAX_PIECES);
        let breaks = self.breaks_in(&domain, k);
        let mut values: Vec<Rational> = (0..=breaks.len()).map(|_| self.value()).collect();
        values.sort_by(|a, b| b.cmp(a));
        StepFunction::new(domain, breaks, values.into_iter().map(ExtScalar::Finite).collect()).expect("valid")
    }

    /// Densities of `μ ≪ ν`: `w_nu` is positive wherever `w_mu` is.
    pub fn two_measures(&mut self) -> TwoMeasures {
        let domain = self.domain();
        let w_mu = self.density(&domain);
        let extra = self.step(&domain);
        let w_nu = w_mu
            .zip_with(&extra, |m, e| if e.is_zero() { m.clone() } else { e.clone() })
            .expect("same domain");
        TwoMeasures::new(w_mu, w_nu).expect("finite densities")
    }

    /// A bounded subinterval of `domain`.
    pub fn subinterval(&mut self, domain: &Interval) -> Interval {
        let pts = self.breaks_in(domain, 2);
        match pts.as_slice() {
            [a, b] => Interval::bounded(a.clone(), b.clone()).expect("ordered"),
            [a] => {
                let b = match domain.upper() {
                    Some(u) => (a + u) / Rational::from_integer(2.into()),
                    None => a + Rational::one(),
                };
                Interval::bounded(a.clone(), b).expect("ordered")
            }
            _ => unreachable!("two draws give at least one point"),
        }
    }
}
