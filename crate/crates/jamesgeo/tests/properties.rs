//! Property tests for the structural invariants: norm axioms, oracle
//! agreement, support predicates, partition identities, certificate ordering
//! and schema round-trips.

use jamesgeo::json::{functional_to_json, parse_functional, parse_vector, vector_to_json};
use jamesgeo::{
    block_split, dual_norm, equivalent_dual_norm, equivalent_primal_norm, james_norm,
    james_norm_bruteforce, midpoint_membership, norm_subgradient, precedes, variation_along,
    DualFunctional, Exponent, MidpointQuery, NormKind, SeqVector, SolverOptions,
};
use proptest::prelude::*;

fn ex(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn vec_strategy(max_idx: usize, max_nnz: usize) -> impl Strategy<Value = SeqVector> {
    prop::collection::vec((0..=max_idx, -2.0..2.0f64), 1..=max_nnz)
        .prop_map(SeqVector::from_entries)
}

fn nonzero_vec(max_idx: usize, max_nnz: usize) -> impl Strategy<Value = SeqVector> {
    vec_strategy(max_idx, max_nnz).prop_filter("nonzero", |v| !v.is_zero())
}

fn exponent_strategy() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 2.0, 3.0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn oracle_agreement(x in vec_strategy(10, 6), p in exponent_strategy()) {
        let e = ex(p);
        let dp = james_norm(&x, e);
        let brute = james_norm_bruteforce(&x, e, 16).unwrap();
        prop_assert!((dp.value - brute.value).abs() <= 1e-9,
            "dp {} vs brute {}", dp.value, brute.value);
        // the witness reproduces the value
        let along = variation_along(&x, e, &dp.witness);
        prop_assert!((along - dp.value).abs() <= 1e-12 * dp.value.max(1.0));
    }

    #[test]
    fn norm_axioms(x in vec_strategy(12, 6), y in vec_strategy(12, 6),
                   c in 0.1..10.0f64, p in exponent_strategy()) {
        let e = ex(p);
        let nx = james_norm(&x, e).value;
        let ny = james_norm(&y, e).value;
        // homogeneity
        let scaled = james_norm(&x.scaled(c), e).value;
        prop_assert!((scaled - c * nx).abs() <= 1e-12 * (c * nx).max(1e-12));
        // triangle inequality
        let sum = james_norm(&(&x + &y), e).value;
        prop_assert!(sum <= nx + ny + 1e-9);
        // definiteness
        prop_assert_eq!(nx == 0.0, x.is_zero());
    }

    #[test]
    fn precedes_is_transitive_and_irreflexive(
        a in nonzero_vec(4, 3),
        shift1 in 5usize..8,
        shift2 in 12usize..15,
    ) {
        let b = a.shifted_up(shift1);
        let c = a.shifted_up(shift2);
        prop_assert!(!precedes(&a, &a).unwrap());
        prop_assert!(precedes(&a, &b).unwrap());
        prop_assert!(precedes(&b, &c).unwrap());
        prop_assert!(precedes(&a, &c).unwrap());
    }

    #[test]
    fn block_split_partitions(f in nonzero_vec(12, 8), cuts in prop::collection::btree_set(0usize..14, 0..4)) {
        let f = f.as_functional();
        let cuts: Vec<usize> = cuts.into_iter().collect();
        let blocks = block_split(&f, &cuts).unwrap();
        let mut sum = DualFunctional::zero();
        for b in &blocks {
            prop_assert!(!b.is_zero());
            sum = &sum + b;
        }
        prop_assert_eq!(sum, f);
        for w in blocks.windows(2) {
            prop_assert!(precedes(&w[0], &w[1]).unwrap());
        }
    }

    #[test]
    fn subgradient_contracts(x in nonzero_vec(8, 4), y in vec_strategy(8, 4), p in exponent_strategy()) {
        let e = ex(p);
        let g = norm_subgradient(&x, e).unwrap();
        prop_assert!((g.apply(&x) - james_norm(&x, e).value).abs() <= 1e-10);
        prop_assert!(g.apply(&y) <= james_norm(&y, e).value + 1e-10);
    }

    #[test]
    fn json_round_trips(x in vec_strategy(20, 8)) {
        let s = vector_to_json(&x).to_string();
        prop_assert_eq!(parse_vector(&s).unwrap(), x.clone());
        let f = x.as_functional();
        let s = functional_to_json(&f).to_string();
        prop_assert_eq!(parse_functional(&s).unwrap(), f);
    }
}

proptest! {
    // solver-backed properties are costlier; fewer cases
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certified_intervals_are_ordered(x in nonzero_vec(8, 5), p in exponent_strategy()) {
        let e = ex(p);
        let opts = SolverOptions::certify_only();
        let f = x.as_functional();
        let d = dual_norm(&f, e, &opts).unwrap();
        prop_assert!(d.lower <= d.upper + 1e-12);
        prop_assert!(james_norm(&d.witness, e).value <= 1.0 + 1e-9);
        let r = equivalent_primal_norm(&x, e, &opts).unwrap();
        prop_assert!(r.lower <= r.upper + 1e-12);
        // the equivalent norm sits inside [gamma ||x||, ||x||]
        let nx = james_norm(&x, e).value;
        prop_assert!(r.upper <= nx * (1.0 + 1e-9));
    }

    #[test]
    fn equivalent_dual_dominates_single_block(x in nonzero_vec(8, 5), p in exponent_strategy()) {
        let e = ex(p);
        let opts = SolverOptions::certify_only();
        let f = x.as_functional();
        let d = dual_norm(&f, e, &opts).unwrap();
        let eq = equivalent_dual_norm(&f, e, &opts).unwrap();
        prop_assert!(eq.value >= d.lower - 1e-9);
    }

    #[test]
    fn midpoint_membership_scales(
        v in nonzero_vec(6, 3),
        z in vec_strategy(8, 3),
        c in 0.2..5.0f64,
        p in exponent_strategy(),
    ) {
        let e = ex(p);
        let x = v.scaled(1.0);
        let y = v.scaled(-1.0);
        let q = MidpointQuery::new(x, y, 0.4, NormKind::Original, e).unwrap();
        let qs = MidpointQuery::new(q.x.scaled(c), q.y.scaled(c), 0.4, NormKind::Original, e).unwrap();
        let opts = SolverOptions::certify_only();
        let a = midpoint_membership(&q, &z, &opts).unwrap();
        let b = midpoint_membership(&qs, &z.scaled(c), &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}
