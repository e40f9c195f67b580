#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use algeo::algebra::{eval_term, Assignment, FiniteAlgebra, Signature, Substitution, Term, VarContext};
use algeo::formula::{Formula, TypedFormula};
use algeo::galois::Theory;
use algeo::geometry::{Model, PointSet, PointSpace};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn ctx(text: &str) -> VarContext {
    VarContext::parse(text).unwrap()
}

fn cyclic(n: usize) -> Arc<FiniteAlgebra> {
    let sig = Signature::new()
        .with_sort("s")
        .with_op("add", &["s", "s"], "s")
        .with_rel("p", &["s"]);
    Arc::new(FiniteAlgebra::from_fn(sig, vec![n], |_, a| (a[0] + a[1]) % n).unwrap())
}

pub fn model(alg: &Arc<FiniteAlgebra>, p: &[usize]) -> Model {
    Model::new(
        Arc::clone(alg),
        [("p".to_string(), p.iter().map(|&e| vec![e]).collect::<Vec<_>>())],
    )
    .unwrap()
}

/// Z3 under addition, with `p` read as {1}, {2} and {1,2}.
pub struct FixA {
    pub alg: Arc<FiniteAlgebra>,
    pub f1: Model,
    pub f2: Model,
    pub f12: Model,
}

pub fn fix_a() -> FixA {
    let alg = cyclic(3);
    FixA {
        f1: model(&alg, &[1]),
        f2: model(&alg, &[2]),
        f12: model(&alg, &[1, 2]),
        alg,
    }
}

/// Z2 under xor with `p` = {1}.
pub fn fix_b() -> Model {
    model(&cyclic(2), &[1])
}

pub fn neg3() -> algeo::algebra::AlgebraMap {
    algeo::algebra::AlgebraMap::new(vec![vec![0, 2, 1]])
}

// ---------------------------------------------------------------------------
// Naive evaluator

/// Truth of `f` at one assignment, by direct recursion on the formula.
pub fn holds_at(model: &Model, ctx: &VarContext, f: &Formula, mu: &Assignment) -> bool {
    let alg = model.algebra();
    match f {
        Formula::Equal(a, b) => eval_term(alg, mu, a).unwrap() == eval_term(alg, mu, b).unwrap(),
        Formula::Rel(name, args) => {
            let tuple: Vec<usize> = args.iter().map(|t| eval_term(alg, mu, t).unwrap()).collect();
            model.relation_named(name).unwrap().contains(&tuple)
        }
        Formula::Or(a, b) => holds_at(model, ctx, a, mu) || holds_at(model, ctx, b, mu),
        Formula::And(a, b) => holds_at(model, ctx, a, mu) && holds_at(model, ctx, b, mu),
        Formula::Not(a) => !holds_at(model, ctx, a, mu),
        Formula::Exists(x, a) => {
            let sort = ctx.sort_of(x).unwrap();
            let n = alg.carrier_of(sort).unwrap();
            (0..n).any(|v| {
                let mut nu = mu.clone();
                nu.insert(x.clone(), v);
                holds_at(model, ctx, a, &nu)
            })
        }
        Formula::Subst(s, body) => {
            let nu: Assignment = s
                .images()
                .map(|(y, t)| (y.to_string(), eval_term(alg, mu, t).unwrap()))
                .collect();
            holds_at(model, s.source(), body, &nu)
        }
    }
}

pub fn naive_value(model: &Model, u: &TypedFormula) -> PointSet {
    let space = model.space(&u.context).unwrap();
    PointSet::from_predicate(&space, |i| {
        let mu = space.index_point(i).to_assignment(&space);
        holds_at(model, &u.context, &u.body, &mu)
    })
}

// ---------------------------------------------------------------------------
// Random generators over the one-sorted signature `add`, `p`

pub fn random_term(rng: &mut TestRng, ctx: &VarContext, depth: usize) -> Term {
    let names: Vec<&str> = ctx.names().collect();
    if depth == 0 || rng.gen_bool(0.45) {
        Term::var(names.choose(rng).unwrap())
    } else {
        Term::app(
            "add",
            vec![random_term(rng, ctx, depth - 1), random_term(rng, ctx, depth - 1)],
        )
    }
}

pub fn random_subst(rng: &mut TestRng, source: &VarContext, target: &VarContext, sig: &Signature) -> Substitution {
    let map: Vec<(String, Term)> = source
        .names()
        .map(|y| (y.to_string(), random_term(rng, target, 2)))
        .collect();
    Substitution::new(source.clone(), target.clone(), map, sig).unwrap()
}

const SOURCE_CONTEXTS: [&str; 4] = ["x:s", "x:s, y:s", "z:s", "y:s, z:s"];

/// A random formula of nesting depth at most `depth`; `subst` allows
/// substitution nodes, whose bodies live over a different context.
pub fn random_body(rng: &mut TestRng, ctx: &VarContext, sig: &Signature, depth: usize, subst: bool) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.5) {
            Formula::rel("p", vec![random_term(rng, ctx, 2)])
        } else {
            Formula::eq(random_term(rng, ctx, 2), random_term(rng, ctx, 1))
        };
    }
    let d = depth - 1;
    let names: Vec<&str> = ctx.names().collect();
    match rng.gen_range(0..if subst { 6 } else { 5 }) {
        0 => Formula::or(
            random_body(rng, ctx, sig, d, subst),
            random_body(rng, ctx, sig, d, subst),
        ),
        1 => Formula::and(
            random_body(rng, ctx, sig, d, subst),
            random_body(rng, ctx, sig, d, subst),
        ),
        2 => Formula::not(random_body(rng, ctx, sig, d, subst)),
        3 => Formula::exists(names.choose(rng).unwrap(), random_body(rng, ctx, sig, d, subst)),
        4 => Formula::forall(names.choose(rng).unwrap(), random_body(rng, ctx, sig, d, subst)),
        _ => {
            let source = VarContext::parse(SOURCE_CONTEXTS.choose(rng).unwrap()).unwrap();
            let s = random_subst(rng, &source, ctx, sig);
            Formula::subst(s, random_body(rng, &source, sig, d, subst))
        }
    }
}

pub fn random_formula(rng: &mut TestRng, ctx: &VarContext, sig: &Signature, depth: usize, subst: bool) -> TypedFormula {
    TypedFormula::new(ctx.clone(), random_body(rng, ctx, sig, depth, subst), sig).unwrap()
}

pub fn random_theory(rng: &mut TestRng, ctx: &VarContext, sig: &Signature, max_len: usize, depth: usize) -> Theory {
    let n = rng.gen_range(0..=max_len);
    let formulas = (0..n).map(|_| random_formula(rng, ctx, sig, depth, false)).collect();
    Theory::new(ctx.clone(), formulas).unwrap()
}

pub fn random_set(rng: &mut TestRng, space: &Arc<PointSpace>) -> PointSet {
    let density: f64 = rng.gen_range(0.1..0.9);
    PointSet::from_predicate(space, |_| rng.gen_bool(density))
}

/// Every subset of a small space, in mask order.
pub fn all_subsets(space: &Arc<PointSpace>) -> Vec<PointSet> {
    let n = space.size();
    assert!(n <= 16);
    (0u32..1 << n)
        .map(|mask| PointSet::from_predicate(space, |i| mask >> i & 1 == 1))
        .collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn set_of(space: &Arc<PointSpace>, indices: &[usize]) -> PointSet {
    PointSet::from_indices(space, indices.iter().copied()).unwrap()
}

/// The same collection of sets, as sorted index lists.
pub fn as_index_lists(sets: &[PointSet]) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = sets.iter().map(|s| s.to_vec()).collect();
    v.sort();
    v
}
