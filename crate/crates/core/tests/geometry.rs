mod common;

use algeo::algebra::{Substitution, Term};
use algeo::formula::parse_formula;
use algeo::geometry::{eval_formula, exists_quant, semantic_support, subst_image, subst_pushforward, PointSet};
use common::*;
use proptest::prelude::*;

#[test]
fn quantifier_axioms_on_every_pair_of_sets() {
    let m = fix_b();
    let space = m.space(&ctx("x:s, y:s")).unwrap();
    let sets = all_subsets(&space);
    let empty = space.empty_set();
    for x in ["x", "y"] {
        assert_eq!(exists_quant(&empty, x).unwrap(), empty);
        for a in &sets {
            let ea = exists_quant(a, x).unwrap();
            assert!(a.is_subset(&ea));
            let other = if x == "x" { "y" } else { "x" };
            assert_eq!(
                exists_quant(&ea, other).unwrap(),
                exists_quant(&exists_quant(a, other).unwrap(), x).unwrap()
            );
            for b in &sets {
                let eb = exists_quant(b, x).unwrap();
                assert_eq!(exists_quant(&a.intersection(&eb), x).unwrap(), ea.intersection(&eb));
            }
        }
    }
}

#[test]
fn equality_axioms() {
    let fx = fix_a();
    let c = ctx("x:s, y:s, z:s");
    let sig = fx.alg.signature.clone();
    let mut r = rng(11);
    for _ in 0..100 {
        let w = random_term(&mut r, &c, 2);
        let refl = parse_formula(&format!("{w} == {w}"), &c, &sig).unwrap();
        assert!(eval_formula(&fx.f1, &refl).unwrap().is_full());

        let (a, a2, b, b2) = (
            random_term(&mut r, &c, 1),
            random_term(&mut r, &c, 1),
            random_term(&mut r, &c, 1),
            random_term(&mut r, &c, 1),
        );
        let hyp = parse_formula(&format!("{a} == {a2} & {b} == {b2}"), &c, &sig).unwrap();
        let concl = parse_formula(&format!("add({a},{b}) == add({a2},{b2})"), &c, &sig).unwrap();
        assert!(eval_formula(&fx.f1, &hyp)
            .unwrap()
            .is_subset(&eval_formula(&fx.f1, &concl).unwrap()));
    }
}

#[test]
fn pushforward_is_a_boolean_homomorphism() {
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let mut r = rng(12);
    let contexts = [ctx("x:s"), ctx("x:s, y:s"), ctx("z:s")];
    for trial in 0..200 {
        let source = &contexts[trial % 3];
        let target = &contexts[(trial / 3) % 3];
        let s = random_subst(&mut r, source, target, sig);
        let space = fx.f1.space(source).unwrap();
        let a = random_set(&mut r, &space);
        let b = random_set(&mut r, &space);
        let push = |x: &PointSet| subst_pushforward(&s, x).unwrap();
        assert_eq!(push(&a.union(&b)), push(&a).union(&push(&b)));
        assert_eq!(push(&a.intersection(&b)), push(&a).intersection(&push(&b)));
        assert_eq!(push(&a.complement()), push(&a).complement());
        assert!(push(&space.empty_set()).is_empty());
        assert!(push(&space.full_set()).is_full());
    }
}

#[test]
fn substituting_equal_terms() {
    // s[x:=w] a ∧ (w ≡ w') ⊆ s[x:=w'] a
    let fx = fix_a();
    let c = ctx("x:s, y:s");
    let sig = &fx.alg.signature;
    let space = fx.f1.space(&c).unwrap();
    let mut r = rng(13);
    for _ in 0..200 {
        let a = random_set(&mut r, &space);
        let w = random_term(&mut r, &c, 2);
        let w2 = random_term(&mut r, &c, 2);
        let at = |t: &Term| {
            Substitution::new(
                c.clone(),
                c.clone(),
                [("x".into(), t.clone()), ("y".into(), Term::var("y"))],
                sig,
            )
            .unwrap()
        };
        let eq = eval_formula(&fx.f1, &parse_formula(&format!("{w} == {w2}"), &c, sig).unwrap()).unwrap();
        let left = subst_pushforward(&at(&w), &a).unwrap().intersection(&eq);
        assert!(left.is_subset(&subst_pushforward(&at(&w2), &a).unwrap()));
    }
}

#[test]
fn every_nonempty_set_fills_the_space_under_all_quantifiers() {
    let fx = fix_a();
    let space = fx.f1.space(&ctx("x:s, y:s")).unwrap();
    for a in all_subsets(&space).into_iter().skip(1) {
        let e = exists_quant(&exists_quant(&a, "x").unwrap(), "y").unwrap();
        assert!(e.is_full());
    }
}

#[test]
fn image_and_pushforward_are_adjoint() {
    // s^* B ⊆ A  iff  B ⊆ s_* A, checked over all pairs on small spaces.
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let s = Substitution::new(
        ctx("z:s"),
        ctx("x:s, y:s"),
        [("z".into(), Term::app("add", vec![Term::var("x"), Term::var("y")]))],
        sig,
    )
    .unwrap();
    let zs = fx.f1.space(&ctx("z:s")).unwrap();
    let xy = fx.f1.space(&ctx("x:s, y:s")).unwrap();
    let mut r = rng(14);
    for a in all_subsets(&zs) {
        for _ in 0..40 {
            let b = random_set(&mut r, &xy);
            let image = subst_image(&s, &b).unwrap();
            let push = subst_pushforward(&s, &a).unwrap();
            assert_eq!(image.is_subset(&a), b.is_subset(&push));
        }
    }
}

#[test]
fn support_examples() {
    let fx = fix_a();
    let c = ctx("x:s, y:s");
    let sig = &fx.alg.signature;
    let support = |text: &str| {
        semantic_support(&fx.f1, &parse_formula(text, &c, sig).unwrap())
            .unwrap()
            .into_iter()
            .collect::<Vec<_>>()
    };
    assert_eq!(support("p(x)"), vec!["x"]);
    assert!(support("p(x) | !p(x)").is_empty());
    assert_eq!(support("x == add(y, y)"), vec!["x", "y"]);
    assert!(support("E x. p(x)").is_empty());
}

#[test]
fn forall_is_dual_to_exists() {
    let fx = fix_a();
    let c = ctx("x:s, y:s");
    let sig = &fx.alg.signature;
    let mut r = rng(15);
    for m in [&fx.f1, &fx.f12, &fix_b()] {
        let sig = if m.algebra().carrier(0) == 3 {
            sig
        } else {
            &m.algebra().signature
        };
        for _ in 0..50 {
            let u = random_formula(&mut r, &c, sig, 3, false);
            let all = parse_formula(&format!("A x. ({})", u.body), &c, sig).unwrap();
            let ex = parse_formula(&format!("E x. !({})", u.body), &c, sig).unwrap();
            assert_eq!(
                eval_formula(m, &all).unwrap(),
                eval_formula(m, &ex).unwrap().complement()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluator_matches_the_naive_one(seed in any::<u64>(), depth in 0usize..5, wide in any::<bool>()) {
        let fx = fix_a();
        let c = if wide { ctx("x:s, y:s") } else { ctx("x:s") };
        let mut r = rng(seed);
        let u = random_formula(&mut r, &c, &fx.alg.signature, depth, true);
        for m in [&fx.f1, &fx.f12] {
            prop_assert_eq!(eval_formula(m, &u).unwrap(), naive_value(m, &u));
        }
    }

    #[test]
    fn exists_is_a_closure_operator(seed in any::<u64>()) {
        let fx = fix_a();
        let space = fx.f1.space(&ctx("x:s, y:s")).unwrap();
        let mut r = rng(seed);
        let a = random_set(&mut r, &space);
        let ea = exists_quant(&a, "y").unwrap();
        prop_assert!(a.is_subset(&ea));
        prop_assert_eq!(exists_quant(&ea, "y").unwrap(), ea);
    }
}
