mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use algeo::algebra::{
    apply_subst_term, aut_group, compose_subst, enumerate_terms, eval_term, find_isomorphisms, validate_algebra,
    Assignment, FiniteAlgebra, Signature,
};
use common::*;
use proptest::prelude::*;

#[test]
fn isomorphism_and_automorphism_counts() {
    let fx = fix_a();
    let b = fix_b();
    assert_eq!(find_isomorphisms(&fx.alg, &fx.alg).len(), 2);
    assert_eq!(find_isomorphisms(b.algebra(), b.algebra()).len(), 1);
    assert!(find_isomorphisms(&fx.alg, b.algebra()).is_empty());

    let g = aut_group(&fx.alg);
    assert_eq!(g.order(), 2);
    assert!(g.elements()[0].is_identity());
    assert_eq!(g.elements()[1], neg3());
    assert!(g.satisfies_group_axioms());
    assert_eq!(aut_group(b.algebra()).order(), 1);
}

#[test]
fn automorphisms_of_a_two_sorted_algebra() {
    // Two unrelated copies of Z2 plus a sort with no operations: every
    // permutation of the bare sort is an automorphism.
    let sig = Signature::new()
        .with_sort("a")
        .with_sort("b")
        .with_op("f", &["a", "a"], "a");
    let alg = FiniteAlgebra::from_fn(sig, vec![2, 3], |_, x| (x[0] + x[1]) % 2).unwrap();
    assert!(validate_algebra(&alg).is_empty());
    let g = aut_group(&alg);
    assert_eq!(g.order(), 6);
    assert!(g.satisfies_group_axioms());
    for h in g.subgroups(&alg) {
        assert!(h.satisfies_group_axioms());
        assert!(h.is_subgroup_of(&g));
    }
}

#[test]
fn substitution_composition_law_on_all_small_terms() {
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let c = ctx("x:s, y:s");
    let terms = enumerate_terms(sig, &c, 3).unwrap().remove(0);
    assert!(terms.len() > 100);
    let mut r = rng(21);
    let substs: Vec<_> = (0..6).map(|_| random_subst(&mut r, &c, &c, sig)).collect();
    for s in &substs {
        for mu_index in 0..9 {
            let mu: Assignment = BTreeMap::from([("x".into(), mu_index / 3), ("y".into(), mu_index % 3)]);
            let mu_s: Assignment = s
                .images()
                .map(|(v, t)| (v.to_string(), eval_term(&fx.alg, &mu, t).unwrap()))
                .collect();
            for t in &terms {
                let lhs = eval_term(&fx.alg, &mu, &apply_subst_term(s, t).unwrap()).unwrap();
                assert_eq!(lhs, eval_term(&fx.alg, &mu_s, t).unwrap());
            }
        }
    }
}

proptest! {
    #[test]
    fn composition_of_substitutions_is_associative_on_terms(seed in any::<u64>()) {
        let fx = fix_a();
        let sig = &fx.alg.signature;
        let c = ctx("x:s, y:s");
        let mut r = rng(seed);
        let s1 = random_subst(&mut r, &c, &c, sig);
        let s2 = random_subst(&mut r, &c, &c, sig);
        let t = random_term(&mut r, &c, 3);
        let composed = compose_subst(&s1, &s2).unwrap();
        let stepwise = apply_subst_term(&s2, &apply_subst_term(&s1, &t).unwrap()).unwrap();
        let direct = apply_subst_term(&composed, &t).unwrap();
        let ev = |t: &algeo::algebra::Term, i: usize| {
            let mu: Assignment = BTreeMap::from([("x".into(), i / 3), ("y".into(), i % 3)]);
            eval_term(&fx.alg, &mu, t).unwrap()
        };
        for i in 0..9 {
            prop_assert_eq!(ev(&stepwise, i), ev(&direct, i));
        }
    }

    #[test]
    fn random_tables_have_closed_automorphism_groups(table in proptest::collection::vec(0usize..3, 9)) {
        let sig = Signature::new().with_sort("s").with_op("m", &["s", "s"], "s");
        let alg = Arc::new(FiniteAlgebra::new(sig, vec![3], vec![table]).unwrap());
        let g = aut_group(&alg);
        prop_assert!(g.satisfies_group_axioms());
        for d in g.elements() {
            prop_assert!(d.is_homomorphism(&alg, &alg));
            prop_assert!(g.contains(&d.inverse()));
        }
    }
}
