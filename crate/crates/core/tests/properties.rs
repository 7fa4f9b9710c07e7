use num_traits::One;
use proptest::prelude::*;

use rihull::bp::{bp_check, bp_ratio, power_weight_rearrangement};
use rihull::embedding::{embedding_constant, verify_embedding_norm, TwoMeasures};
use rihull::hull::{epsilon_zero_eligible, hull_lower_bound, hull_witness, HullInstance};
use rihull::inequalities::{hardy_littlewood, reverse_hardy_littlewood};
use rihull::mpt::{build_increasing_mpt, check_mpt, necessity_certificate, realizes, ryff_conditions, RyffVerdict};
use rihull::power_tail::PowerTail;
use rihull::rearrangement::{
    decreasing_rearrangement, distribution, equimeasurable, increasing_rearrangement,
    increasing_rearrangement_inf_formula, lower_distribution,
};
use rihull::step::refine;
use rihull::{ExtScalar, Interval, Rational, StepFunction, WeightedSpace};

fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn fin(q: Rational) -> ExtScalar {
    ExtScalar::Finite(q)
}

fn arb_value() -> BoxedStrategy<Rational> {
    prop_oneof![
        prop::sample::select(vec![int(0), frac(1, 2), int(1), int(2), int(3)]),
        (0..=1000i64, 1..=1000i64).prop_map(|(n, d)| frac(n, d)),
    ]
    .boxed()
}

fn arb_positive() -> BoxedStrategy<Rational> {
    (1..=1000i64, 1..=1000i64).prop_map(|(n, d)| frac(n, d)).boxed()
}

fn arb_domain() -> impl Strategy<Value = Interval> {
    prop_oneof![
        (-5..=5i64, 1..=20i64).prop_map(|(a, l)| Interval::bounded(int(a), int(a) + frac(l, 2)).unwrap()),
        (-5..=5i64).prop_map(|a| Interval::new(Some(int(a)), None).unwrap()),
        (-5..=5i64).prop_map(|b| Interval::new(None, Some(int(b))).unwrap()),
        Just(Interval::real_line()),
    ]
}

/// Up to 7 sorted interior points of `domain`.
fn points_in(domain: &Interval, raw: Vec<i64>) -> Vec<Rational> {
    let mut pts: Vec<Rational> = raw
        .into_iter()
        .map(|k| match (domain.lower(), domain.upper()) {
            (Some(a), Some(b)) => a + (b - a) * frac(k, 201),
            (Some(a), None) => a + frac(k, 10),
            (None, Some(b)) => b - frac(k, 10),
            (None, None) => frac(k, 10) - int(10),
        })
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

fn arb_step_with<S>(domain: Interval, values: S) -> impl Strategy<Value = StepFunction>
where
    S: Strategy<Value = Rational> + Clone + 'static,
{
    prop::collection::vec(1..=200i64, 0..8).prop_flat_map(move |raw| {
        let breaks = points_in(&domain, raw);
        let domain = domain.clone();
        prop::collection::vec(values.clone(), breaks.len() + 1).prop_map(move |vals| {
            StepFunction::new(domain.clone(), breaks.clone(), vals.into_iter().map(fin).collect()).unwrap()
        })
    })
}

fn arb_step(domain: Interval) -> impl Strategy<Value = StepFunction> {
    arb_step_with(domain, arb_value())
}

fn arb_space(domain: Interval) -> impl Strategy<Value = WeightedSpace> {
    let density = prop_oneof![1 => Just(int(0)), 4 => arb_positive()].boxed();
    prop_oneof![
        1 => Just(WeightedSpace::lebesgue(domain.clone())),
        3 => arb_step_with(domain, density).prop_filter("nonzero density", |d| !d.is_zero())
            .prop_map(|d| WeightedSpace::new(d).unwrap()),
    ]
}

/// A space with two step functions on it.
fn arb_instance() -> impl Strategy<Value = (WeightedSpace, StepFunction, StepFunction)> {
    arb_domain().prop_flat_map(|d| (arb_space(d.clone()), arb_step(d.clone()), arb_step(d)))
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn integration_is_additive_monotone_and_refinement_invariant((space, f, g) in arb_instance()) {
        let sum = f.add(&g).unwrap();
        let (a, b, c) = (space.integrate(&f).unwrap(), space.integrate(&g).unwrap(), space.integrate(&sum).unwrap());
        prop_assert_eq!(&a + &b, c.clone());
        prop_assert!(a <= c);
        let r = refine(&f, &g).unwrap();
        let mut total = ExtScalar::zero();
        for i in 0..r.len() {
            total = &total + &(&space.measure_of(&r.piece(i)).unwrap() * &r.left[i]);
        }
        prop_assert_eq!(total, a);
    }

    #[test]
    fn canonical_text_round_trips((_space, f, _g) in arb_instance()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: StepFunction = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn rearrangement_invariants((space, f, g) in arb_instance(), lo in 1..200i64, hi in 1..200i64) {
        let f_star = decreasing_rearrangement(&f, &space).unwrap();
        let lebesgue = WeightedSpace::lebesgue(f_star.domain().clone());
        prop_assert!(equimeasurable(&f, &space, &f_star, &lebesgue).unwrap());
        prop_assert_eq!(distribution(&f, &space).unwrap(), distribution(&f_star, &lebesgue).unwrap());
        let low = increasing_rearrangement(&f, &space).unwrap();
        prop_assert_eq!(&low, &increasing_rearrangement_inf_formula(&f, &space).unwrap());

        let h = f.add(&g).unwrap();
        prop_assert!(f_star.le_everywhere(&decreasing_rearrangement(&h, &space).unwrap()).unwrap());
        prop_assert!(low.le_everywhere(&increasing_rearrangement(&h, &space).unwrap()).unwrap());
        prop_assert!(lower_distribution(&h, &space).unwrap().le_everywhere(&lower_distribution(&f, &space).unwrap()).unwrap());

        let pts = points_in(space.domain(), vec![lo, hi]);
        if let [a, b] = pts.as_slice() {
            let e = Interval::bounded(a.clone(), b.clone()).unwrap();
            let mask = StepFunction::constant(e, ExtScalar::one()).extend_to(space.domain(), ExtScalar::zero()).unwrap();
            let on_e = space.restrict_to(&mask).unwrap();
            if !on_e.total_measure().is_zero() {
                prop_assert!(low.le_everywhere(&increasing_rearrangement(&f, &on_e).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn ryff_representation_or_certificate((space, f, _g) in arb_instance()) {
        match ryff_conditions(&f, &space).unwrap() {
            RyffVerdict::Neither { s } => prop_assert!(necessity_certificate(&f, &space, &s).unwrap()),
            _ => {
                let sigma = build_increasing_mpt(&f, &space).unwrap();
                prop_assert!(check_mpt(&sigma, &space).is_ok());
                let low = increasing_rearrangement(&f, &space).unwrap();
                prop_assert!(realizes(&f, &low, &sigma, &space).unwrap());
            }
        }
    }

    #[test]
    fn hardy_littlewood_sandwich((space, f, g) in arb_instance()) {
        let fwd = hardy_littlewood(&f, &g, &space).unwrap();
        let rev = reverse_hardy_littlewood(&f, &g, &space).unwrap();
        prop_assert!(fwd.holds && rev.holds);
        prop_assert!(rev.rhs.possibly_le(&fwd.lhs) && fwd.lhs.possibly_le(&fwd.rhs));
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn hull_sandwich_and_scaling((space, v, g) in arb_instance(), k in 1..=3i64, c in arb_positive()) {
        let p = int(k);
        let instance = HullInstance::new(space.clone(), v.clone(), p.clone()).unwrap();
        let lower = hull_lower_bound(&g, &instance).unwrap();
        prop_assert!(lower.holds);

        let scaled = HullInstance::new(space.clone(), v.map(|x| x * &fin(c.clone())), p.clone()).unwrap();
        let lower_scaled = hull_lower_bound(&g, &scaled).unwrap();
        prop_assert_eq!(lower_scaled.lhs, lower.lhs.scale(&c));
        prop_assert_eq!(lower_scaled.rhs, lower.rhs.scale(&c));

        if instance.vstar_is_zero() {
            return Ok(());
        }
        let g_star = decreasing_rearrangement(&g, &space).unwrap();
        let mut epsilons = vec![frac(1, 10)];
        if epsilon_zero_eligible(&instance).unwrap() {
            epsilons.push(int(0));
        }
        for eps in epsilons {
            let w = hull_witness(&g_star, &instance, &eps).unwrap();
            prop_assert!(w.passes(), "eps = {}", eps);
            let ws = hull_witness(&g_star, &scaled, &eps).unwrap();
            prop_assert!(ws.passes(), "scaled, eps = {}", eps);
        }
    }

    #[test]
    fn lower_rearrangement_below_threshold((space, v, _g) in arb_instance()) {
        let instance = HullInstance::new(space.clone(), v.clone(), int(1)).unwrap();
        let s = instance.s().clone();
        let mask = v.map(|x| if x < &s { ExtScalar::one() } else { ExtScalar::zero() });
        let r1 = space.restrict_to(&mask).unwrap();
        let m1 = r1.total_measure();
        if let ExtScalar::Finite(m) = &m1 {
            if m > &int(0) {
                let window = Interval::bounded(int(0), m.clone()).unwrap();
                let restricted = increasing_rearrangement(&v, &r1).unwrap().restrict(&window).unwrap();
                prop_assert_eq!(instance.v_lowstar().restrict(&window).unwrap(), restricted);
            }
        }
    }

    #[test]
    fn embedding_monotone_and_bounding(
        (space, f, bump) in arb_instance(),
        p in prop::sample::select(vec![frac(3, 2), int(2), int(3)]),
    ) {
        let w_mu = space.density().clone();
        let w_nu = w_mu.add(&bump).unwrap();
        let m = TwoMeasures::new(w_mu.clone(), w_nu.clone()).unwrap();
        let larger = TwoMeasures::new(w_mu, w_nu.add(&bump).unwrap()).unwrap();
        let a = embedding_constant(&m, &p).unwrap().a;
        prop_assert!(embedding_constant(&larger, &p).unwrap().a.possibly_le(&a));
        prop_assert!(verify_embedding_norm(&m, &p, &[f]).unwrap().all_hold);
    }

    #[test]
    fn bp_constant_bounds_the_ratio(
        alpha in prop::sample::select(vec![int(0), frac(1, 4), frac(1, 2), int(1)]),
        p in prop::sample::select(vec![int(2), frac(5, 2), int(3)]),
        (head, break_at) in (arb_positive(), 1..=20i64),
        rs in prop::collection::vec((1..=1000i64, 1..=100i64), 20),
    ) {
        let tail = &head + int(1);
        let step = StepFunction::new(Interval::half_line(), vec![frac(break_at, 2)], vec![fin(head), fin(tail)]).unwrap();
        prop_assume!(alpha < &p - Rational::one());
        for w in [PowerTail::monomial(Rational::one(), alpha.clone()), PowerTail::from_step(&step).unwrap()] {
            let r = bp_check(&w, &p).unwrap();
            prop_assert!(r.in_class);
            for (n, d) in &rs {
                let ratio = bp_ratio(&w, &p, &frac(*n, *d)).unwrap();
                prop_assert!(ratio.possibly_le(&r.constant_c), "r = {}/{}: {} > {}", n, d, ratio, r.constant_c);
            }
        }
    }
}

/// `⌊m|x|⌋^α/m^α` on `(−3, 3)`, a lower staircase for `|x|^α`.
fn staircase(alpha: usize, m: i64) -> StepFunction {
    let domain = Interval::bounded(int(-3), int(3)).unwrap();
    let breaks = (-3 * m + 1..3 * m).map(|j| frac(j, m)).collect();
    let values = (-3 * m..3 * m)
        .map(|j| fin(num_traits::pow(frac(if j < 0 { -j - 1 } else { j }, m), alpha)))
        .collect();
    StepFunction::new(domain, breaks, values).unwrap()
}

#[test]
fn staircase_rearrangements_converge_to_the_power_weight() {
    for alpha in [1usize, 2] {
        let reference = power_weight_rearrangement(&int(alpha as i64)).unwrap();
        for t in [frac(1, 3), int(1), frac(17, 7), int(5)] {
            let exact = reference.eval(&t).to_f64();
            let mut previous = f64::INFINITY;
            for m in [1, 2, 4, 8, 16] {
                let v = staircase(alpha, m);
                let low = increasing_rearrangement(&v, &WeightedSpace::lebesgue(v.domain().clone())).unwrap();
                let approx = low.value_at(&t).to_f64();
                let gap = exact - approx;
                assert!(gap >= 0.0, "alpha = {alpha}, t = {t}, m = {m}: staircase above the limit");
                assert!(gap <= previous, "alpha = {alpha}, t = {t}, m = {m}: not monotone");
                // One step of height at most alpha * 3^(alpha - 1) / m.
                assert!(gap <= (alpha as f64) * 3f64.powi(alpha as i32 - 1) / m as f64 + 1e-12);
                previous = gap;
            }
        }
    }
}
