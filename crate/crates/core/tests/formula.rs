mod common;

use algeo::algebra::{Substitution, Term};
use algeo::formula::{apply_subst_formula, normalize_elementary, parse_formula, Formula, FreshNames};
use algeo::geometry::{eval_formula, subst_pushforward};
use algeo::Error;
use common::*;
use proptest::prelude::*;

#[test]
fn parses_the_documented_example() {
    let fx = fix_a();
    let u = parse_formula("p(x) & E y. x == add(y,y)", &ctx("x:s, y:s"), &fx.alg.signature).unwrap();
    let expected = Formula::and(
        Formula::rel("p", vec![Term::var("x")]),
        Formula::exists(
            "y",
            Formula::eq(Term::var("x"), Term::app("add", vec![Term::var("y"), Term::var("y")])),
        ),
    );
    assert_eq!(u.body, expected);
}

#[test]
fn parse_errors_carry_positions() {
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let c = ctx("x:s");
    let message = |text: &str| match parse_formula(text, &c, sig) {
        Err(Error::Parse { line, column, message }) => (line, column, message),
        other => panic!("expected a parse error for {text}, got {other:?}"),
    };
    assert_eq!(message("q(x)"), (1, 1, "unknown relation or operation `q`".to_string()));
    assert_eq!(message("p(y)").1, 3);
    assert!(matches!(
        parse_formula("p(x, x)", &c, sig),
        Err(Error::ArityMismatch { .. })
    ));
    match parse_formula("p(x) &", &c, sig) {
        Err(Error::Parse { line: 1, column, .. }) => assert!(column >= 6),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn display_round_trips() {
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let c = ctx("x:s, y:s");
    let mut r = rng(31);
    for _ in 0..300 {
        let u = random_formula(&mut r, &c, sig, 4, false);
        let back = parse_formula(&u.body.to_string(), &c, sig).unwrap();
        assert_eq!(
            eval_formula(&fx.f12, &back).unwrap(),
            eval_formula(&fx.f12, &u).unwrap()
        );
    }
}

#[test]
fn normalizing_a_substitution_example() {
    let fx = fix_a();
    let sig = &fx.alg.signature;
    let s = Substitution::new(
        ctx("y:s"),
        ctx("x:s"),
        [("y".into(), Term::app("add", vec![Term::var("x"), Term::var("x")]))],
        sig,
    )
    .unwrap();
    let u = parse_formula("p(y) & E y. p(add(y,y))", &ctx("y:s"), sig).unwrap();
    let lazy = apply_subst_formula(&s, &u).unwrap();
    assert!(!lazy.is_elementary());
    let v = normalize_elementary(&lazy, &mut FreshNames::new()).unwrap();
    assert!(v.is_elementary());
    assert!(ctx("x:s").is_subcontext_of(&v.context));
    let inc = Substitution::inclusion(&lazy.context, &v.context).unwrap();
    let expected = subst_pushforward(&inc, &eval_formula(&fx.f1, &lazy).unwrap()).unwrap();
    assert_eq!(eval_formula(&fx.f1, &v).unwrap(), expected);
}

#[test]
fn elementary_formulas_are_left_alone() {
    let fx = fix_a();
    let u = parse_formula("p(x) | E x. x == add(x,x)", &ctx("x:s"), &fx.alg.signature).unwrap();
    assert_eq!(normalize_elementary(&u, &mut FreshNames::new()).unwrap(), u);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalization_is_a_cylinder(seed in any::<u64>(), depth in 1usize..5) {
        let fx = fix_a();
        let c = ctx("x:s");
        let mut r = rng(seed);
        let u = random_formula(&mut r, &c, &fx.alg.signature, depth, true);
        let v = normalize_elementary(&u, &mut FreshNames::new()).unwrap();
        prop_assert!(v.is_elementary());
        let inc = Substitution::inclusion(&u.context, &v.context).unwrap();
        for m in [&fx.f1, &fx.f12] {
            let expected = subst_pushforward(&inc, &eval_formula(m, &u).unwrap()).unwrap();
            prop_assert_eq!(eval_formula(m, &v).unwrap(), expected);
        }
    }
}
