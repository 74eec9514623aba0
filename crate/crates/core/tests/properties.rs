//! Algebraic and soundness invariants over random inputs.

use proptest::prelude::*;

use subseries::classify::{
    classify, extract_oscillation_intervals, DiagnosticsConfig, ExtractOptions, VerdictKind,
};
use subseries::constructions::{compose_response, greedy_finite_adjust};
use subseries::index_set::IndexSet;
use subseries::partition::IntervalPartition;
use subseries::rational::{ExactSum, Rational};
use subseries::relsys::{
    dual, harness_config, replay_trial, splitting, splitting_candidate, splitting_sampler,
    verify_tukey,
};
use subseries::series::Series;

/// How far below the horizon pointwise identities are compared.
const SPAN: u64 = 300;

fn bits(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(any::<bool>(), 0..=max)
        .prop_map(|v| v.into_iter().map(|b| if b { '1' } else { '0' }).collect())
}

fn periodic_set() -> impl Strategy<Value = IndexSet> {
    (
        bits(12),
        bits(8).prop_filter("nonempty cycle", |c| !c.is_empty()),
    )
        .prop_map(|(p, c)| IndexSet::periodic_bits(&p, &c).expect("bit strings"))
}

/// Periodic sets whose cycle has both a member and a non-member.
fn split_periodic_set() -> impl Strategy<Value = IndexSet> {
    (
        bits(12),
        bits(8).prop_filter("mixed cycle", |c| c.contains('0') && c.contains('1')),
    )
        .prop_map(|(p, c)| IndexSet::periodic_bits(&p, &c).expect("bit strings"))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=20).prop_map(|(n, d)| Rational::new(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |q| !q.is_zero())
}

fn partition() -> impl Strategy<Value = IntervalPartition> {
    prop::collection::vec(1u64..=9, 1..40).prop_map(|gaps| {
        let mut b = vec![0u64];
        for g in gaps {
            b.push(b.last().unwrap() + g);
        }
        IntervalPartition::from_boundaries(b).expect("increasing")
    })
}

fn same_below(a: &IndexSet, b: &IndexSet) -> bool {
    (0..SPAN).all(|i| a.contains(i) == b.contains(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn boolean_laws(a in periodic_set(), b in periodic_set(), c in periodic_set()) {
        prop_assert!(same_below(&a.complement().complement(), &a));
        prop_assert!(same_below(&a.union(&b).complement(), &a.complement().intersect(&b.complement())));
        prop_assert!(same_below(&a.intersect(&b.union(&c)), &a.intersect(&b).union(&a.intersect(&c))));
        prop_assert!(same_below(&a.symm_diff(&b), &a.difference(&b).union(&b.difference(&a))));
        prop_assert!(same_below(&a.symm_diff(&a), &IndexSet::empty()));
        prop_assert!(same_below(&a.difference(&b), &a.intersect(&b.complement())));
    }

    #[test]
    fn pointwise_matches_predicates(a in periodic_set(), b in periodic_set()) {
        let u = a.union(&b);
        let s = a.symm_diff(&b);
        for i in 0..SPAN {
            prop_assert_eq!(u.contains(i), a.contains(i) || b.contains(i));
            prop_assert_eq!(s.contains(i), a.contains(i) != b.contains(i));
        }
    }

    #[test]
    fn rank_and_select_agree(a in periodic_set()) {
        prop_assume!(a.cert_infinite());
        for n in 0..40 {
            let x = a.select(n).expect("infinite");
            prop_assert!(a.contains(x));
            prop_assert_eq!(a.rank(x), n);
        }
    }

    #[test]
    fn partial_sums_are_exact(x in periodic_set(), k in 0u64..400) {
        let a = Series::alternating_harmonic();
        let manual: Rational = (0..k).filter(|&i| x.contains(i)).map(|i| a.term(i)).sum();
        prop_assert_eq!(a.partial_sum(&x, k), manual);
    }

    #[test]
    fn exact_sum_is_order_free(v in prop::collection::vec(rational(), 0..40)) {
        let mut fwd = ExactSum::new();
        let mut back = ExactSum::new();
        for q in &v {
            fwd.add(q);
        }
        for q in v.iter().rev() {
            back.add(q);
        }
        prop_assert_eq!(fwd.value(), back.value());
    }

    #[test]
    fn rationals_print_and_parse(q in rational()) {
        let back: Rational = q.to_string().parse().expect("own output parses");
        prop_assert_eq!(back, q);
    }

    #[test]
    fn scaling_is_linear(q in nonzero_rational(), x in periodic_set(), k in 0u64..300) {
        let a = Series::alternating_harmonic();
        let s = a.scale(&q).unwrap();
        prop_assert_eq!(s.partial_sum(&x, k), &q * &a.partial_sum(&x, k));
    }

    #[test]
    fn restriction_reindexes(x in periodic_set(), k in 0u64..300) {
        prop_assume!(x.cert_infinite());
        let a = Series::alternating_harmonic();
        let r = a.restrict(&x).unwrap();
        prop_assert_eq!(r.partial_sum(&IndexSet::omega(), x.rank(k)), a.partial_sum(&x, k));
    }

    #[test]
    fn perturbation_is_injective(s in rational(), t in rational(), i in 0u64..1000) {
        let a = Series::alternating_harmonic();
        let (ps, pt) = (a.perturb_quadratic(&s), a.perturb_quadratic(&t));
        prop_assert_eq!(ps.term(i) == pt.term(i), s == t);
    }

    #[test]
    fn flipping_twice_is_identity(x in periodic_set(), i in 0u64..1000) {
        let a = Series::alternating_harmonic();
        prop_assert_eq!(a.flip_signs_on(&x).flip_signs_on(&x).term(i), a.term(i));
        prop_assert_eq!(a.flip_signs_on(&x).term(i).abs(), a.term(i).abs());
    }

    #[test]
    fn compose_is_an_involution(x in periodic_set(), s in periodic_set(), t in periodic_set(), i in partition()) {
        let twice = compose_response(&compose_response(&x, &i, &s), &i, &s);
        prop_assert!(same_below(&twice, &x));
        // composing with S then T is composing once with the agreement set of S and T
        let st = compose_response(&compose_response(&x, &i, &s), &i, &t);
        let agree = s.symm_diff(&t).complement();
        prop_assert!(same_below(&st, &compose_response(&x, &i, &agree)));
    }

    #[test]
    fn dual_is_an_involution(x in periodic_set(), y in periodic_set()) {
        let cfg = DiagnosticsConfig::default().with_horizon(2000);
        let r = splitting();
        let dd = dual(&dual(&r));
        prop_assert_eq!(dd.evaluate(&x, &y, &cfg), r.evaluate(&x, &y, &cfg));
        prop_assert_eq!(dual(&r).evaluate(&y, &x, &cfg), !r.evaluate(&x, &y, &cfg));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn greedy_lands_inside(lo in -150i64..150, width in 1i64..50) {
        let a = Series::alternating_harmonic();
        let (lo, hi) = (Rational::new(lo, 100), Rational::new(lo + width, 100));
        let g = greedy_finite_adjust(&a, &lo, &hi, 1 << 20).unwrap();
        let exact: Rational = g.picks.iter().map(|&i| a.term(i)).sum();
        prop_assert_eq!(&exact, &g.sum);
        prop_assert!(lo < exact && exact < hi);
    }

    #[test]
    fn extracted_intervals_are_sound(x in split_periodic_set(), count in 1u64..4) {
        let a = Series::alternating_harmonic();
        let cfg = DiagnosticsConfig::default().with_horizon(20_000);
        let verdict = classify(&a, &x, &cfg).unwrap();
        prop_assume!(matches!(verdict.kind, VerdictKind::TendsPlusInf | VerdictKind::TendsMinusInf));
        let Ok(ex) = extract_oscillation_intervals(&a, &x, &cfg, &ExtractOptions::new(count)) else {
            return Ok(());
        };
        prop_assert!(ex.inequalities_hold());
        let mut last = 0;
        for iv in &ex.intervals {
            prop_assert!(last <= iv.start && iv.start < iv.end);
            last = iv.end;
            if iv.end - iv.start <= 4096 {
                let inside: Rational = (iv.start..iv.end).filter(|&i| x.contains(i)).map(|i| a.term(i)).sum();
                prop_assert!(iv.inside.lo <= inside && inside <= iv.inside.hi);
            }
        }
    }

    #[test]
    fn harness_trials_replay(master in any::<u64>()) {
        let cfg = harness_config(2000);
        let c = splitting_candidate();
        let rep = verify_tukey(&c, &splitting_sampler, 6, master, &cfg);
        for t in &rep.trials {
            let again = replay_trial(&c, &splitting_sampler, t.seed, &cfg).expect("sampler succeeded before");
            prop_assert_eq!(&again, t);
        }
    }
}
