//! Elimination of substitution nodes.
//!
//! `s_*` is pushed through the connectives and applied to atoms directly:
//! `s_*(φ(w1,…,wn)) = φ(s w1,…,s wn)` and likewise for equalities. Under a
//! pending substitution a quantifier `∃x` is renamed to a variable that no
//! other substituted term mentions; when no such variable of the ambient
//! context is available a fresh one is added, so the result lives over an
//! enlarged context `Y ⊇ X`.

use std::collections::BTreeMap;

use super::{Formula, TypedFormula};
use crate::algebra::{Term, VarContext};
use crate::error::Result;

/// Deterministic generator of `_v0, _v1, …`, skipping names already taken.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    next: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, taken: &VarContext) -> String {
        loop {
            let name = format!("_v{}", self.next);
            self.next += 1;
            if !taken.contains(&name) {
                return name;
            }
        }
    }
}

struct Normalizer<'a> {
    out_ctx: VarContext,
    fresh: &'a mut FreshNames,
}

type Pending = BTreeMap<String, Term>;

fn apply(sigma: &Pending, t: &Term) -> Term {
    match t {
        Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| apply(sigma, a)).collect()),
    }
}

impl Normalizer<'_> {
    /// `node_ctx` types `f`; `sigma` maps each of its variables to a term over
    /// the output context.
    fn go(&mut self, f: &Formula, node_ctx: &VarContext, sigma: &Pending) -> Result<Formula> {
        Ok(match f {
            Formula::Equal(a, b) => Formula::Equal(apply(sigma, a), apply(sigma, b)),
            Formula::Rel(name, args) => Formula::Rel(name.clone(), args.iter().map(|a| apply(sigma, a)).collect()),
            Formula::Or(a, b) => Formula::or(self.go(a, node_ctx, sigma)?, self.go(b, node_ctx, sigma)?),
            Formula::And(a, b) => Formula::and(self.go(a, node_ctx, sigma)?, self.go(b, node_ctx, sigma)?),
            Formula::Not(a) => Formula::not(self.go(a, node_ctx, sigma)?),
            Formula::Exists(x, body) => {
                let sort = node_ctx
                    .sort_of(x)
                    .expect("well-typed formula binds context variables")
                    .to_string();
                let clashes = |y: &str| {
                    sigma
                        .iter()
                        .any(|(z, t)| z != x && node_ctx.contains(z) && t.mentions(y))
                };
                let bound = if self.out_ctx.sort_of(x) == Some(sort.as_str()) && !clashes(x) {
                    x.clone()
                } else {
                    let y = self.fresh.fresh(&self.out_ctx);
                    self.out_ctx = self.out_ctx.extended(&y, &sort)?;
                    y
                };
                let mut inner = sigma.clone();
                inner.insert(x.clone(), Term::Var(bound.clone()));
                Formula::exists(&bound, self.go(body, node_ctx, &inner)?)
            }
            Formula::Subst(s, body) => {
                let composed: Pending = s.images().map(|(v, t)| (v.to_string(), apply(sigma, t))).collect();
                self.go(body, s.source(), &composed)?
            }
        })
    }
}

/// Rewrites `u` into an equivalent elementary formula over a context that
/// contains `u.context` plus any fresh variables the rewriting needed.
/// Elementary inputs come back unchanged.
pub fn normalize_elementary(u: &TypedFormula, fresh: &mut FreshNames) -> Result<TypedFormula> {
    let identity: Pending = u.context.names().map(|n| (n.to_string(), Term::var(n))).collect();
    let mut n = Normalizer {
        out_ctx: u.context.clone(),
        fresh,
    };
    let body = n.go(&u.body, &u.context, &identity)?;
    Ok(TypedFormula {
        context: n.out_ctx,
        body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Signature, Substitution};
    use crate::formula::{apply_subst_formula, parse_formula};

    fn sig() -> Signature {
        Signature::new()
            .with_sort("s")
            .with_op("add", &["s", "s"], "s")
            .with_rel("p", &["s"])
    }

    fn ctx(t: &str) -> VarContext {
        VarContext::parse(t).unwrap()
    }

    fn subst(src: &str, tgt: &str, pairs: &[(&str, Term)]) -> Substitution {
        Substitution::new(
            ctx(src),
            ctx(tgt),
            pairs.iter().map(|(k, v)| (k.to_string(), v.clone())),
            &sig(),
        )
        .unwrap()
    }

    #[test]
    fn atom_under_substitution() {
        let s = subst(
            "z:s",
            "x:s, y:s",
            &[("z", Term::app("add", vec![Term::var("x"), Term::var("y")]))],
        );
        let u = apply_subst_formula(&s, &parse_formula("p(z)", &ctx("z:s"), &sig()).unwrap()).unwrap();
        let v = normalize_elementary(&u, &mut FreshNames::new()).unwrap();
        assert_eq!(v.context, ctx("x:s, y:s"));
        assert_eq!(v.body.to_string(), "p(add(x,y))");
    }

    #[test]
    fn quantifier_under_substitution_gets_fresh_name() {
        let s = subst("z:s", "x:s", &[("z", Term::var("x"))]);
        let inner = parse_formula("E z. p(z)", &ctx("z:s"), &sig()).unwrap();
        let u = apply_subst_formula(&s, &inner).unwrap();
        let v = normalize_elementary(&u, &mut FreshNames::new()).unwrap();
        assert_eq!(v.context, ctx("x:s, _v0:s"));
        assert_eq!(
            v.body,
            Formula::exists("_v0", Formula::rel("p", vec![Term::var("_v0")]))
        );
        assert!(v.is_elementary());
    }

    #[test]
    fn capture_is_avoided() {
        // [x:=y, y:=x] applied to E x. x == y must not capture the swapped y.
        let s = subst("x:s, y:s", "x:s, y:s", &[("x", Term::var("y")), ("y", Term::var("x"))]);
        let inner = parse_formula("E x. x == y", &ctx("x:s, y:s"), &sig()).unwrap();
        let v = normalize_elementary(&apply_subst_formula(&s, &inner).unwrap(), &mut FreshNames::new()).unwrap();
        assert_eq!(v.body.to_string(), "E _v0. _v0 == x");
    }

    #[test]
    fn elementary_input_is_a_fixpoint() {
        let u = parse_formula("p(x) & E y. x == add(y,y)", &ctx("x:s, y:s"), &sig()).unwrap();
        let v = normalize_elementary(&u, &mut FreshNames::new()).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn fresh_names_skip_taken() {
        let mut f = FreshNames::new();
        assert_eq!(f.fresh(&ctx("_v0:s, _v1:s")), "_v2");
        assert_eq!(f.fresh(&ctx("x:s")), "_v3");
    }
}
