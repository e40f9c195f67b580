use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{FiniteAlgebra, Signature};
use crate::error::{Error, Result};

/// A finite sorted variable context `X`, kept sorted ascending by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarContext {
    vars: Vec<(String, String)>,
}

impl VarContext {
    pub fn new<I, A, B>(vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut vars: Vec<(String, String)> = vars.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        vars.sort();
        for w in vars.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::ContextMismatch(format!("variable `{}` declared twice", w[0].0)));
            }
        }
        Ok(VarContext { vars })
    }

    pub fn empty() -> Self {
        VarContext::default()
    }

    /// Parses `x:s, y:s`. An empty or blank string is the empty context.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vars = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (name, sort) = part.split_once(':').ok_or_else(|| Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected `name:sort`, found `{part}`"),
            })?;
            let (name, sort) = (name.trim(), sort.trim());
            if !is_ident(name) || !is_ident(sort) {
                return Err(Error::Parse {
                    line: 1,
                    column: 1,
                    message: format!("malformed variable declaration `{part}`"),
                });
            }
            vars.push((name.to_string(), sort.to_string()));
        }
        Self::new(vars)
    }

    pub fn vars(&self) -> &[(String, String)] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|(n, _)| n.as_str().cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn sort_of(&self, name: &str) -> Option<&str> {
        self.position(name).map(|i| self.vars[i].1.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|(n, _)| n.as_str())
    }

    /// Checks that every variable's sort is declared.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        for (_, s) in &self.vars {
            sig.require_sort(s)?;
        }
        Ok(())
    }

    pub fn is_subcontext_of(&self, other: &VarContext) -> bool {
        self.vars.iter().all(|(n, s)| other.sort_of(n) == Some(s.as_str()))
    }

    /// Context with one extra variable; fails if the name is taken.
    pub fn extended(&self, name: &str, sort: &str) -> Result<VarContext> {
        let mut vars = self.vars.clone();
        vars.push((name.to_string(), sort.to_string()));
        VarContext::new(vars)
    }
}

impl fmt::Display for VarContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, s)) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}:{s}")?;
        }
        Ok(())
    }
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An element of the term algebra `W(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(op: &str, args: Vec<Term>) -> Term {
        Term::App(op.to_string(), args)
    }

    /// Well-sortedness check; returns the sort of the term.
    pub fn sort_in(&self, ctx: &VarContext, sig: &Signature) -> Result<String> {
        match self {
            Term::Var(v) => ctx
                .sort_of(v)
                .map(str::to_string)
                .ok_or_else(|| Error::UnboundVariable(v.clone())),
            Term::App(op, args) => {
                let (_, decl) = sig.op(op).ok_or_else(|| Error::UnknownSymbol {
                    kind: "operation",
                    name: op.clone(),
                })?;
                if decl.args.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        name: op.clone(),
                        expected: decl.args.len(),
                        found: args.len(),
                    });
                }
                for (i, (a, expected)) in args.iter().zip(&decl.args).enumerate() {
                    let found = a.sort_in(ctx, sig)?;
                    if &found != expected {
                        return Err(Error::SortMismatch {
                            place: format!("argument {} of `{op}`", i + 1),
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(decl.result.clone())
            }
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::App(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(op, args) if args.is_empty() => f.write_str(op),
            Term::App(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A point given as an explicit variable-to-element map.
pub type Assignment = BTreeMap<String, usize>;

/// Value of the homomorphic extension of `assignment` at `term`.
pub fn eval_term(alg: &FiniteAlgebra, assignment: &Assignment, term: &Term) -> Result<usize> {
    match term {
        Term::Var(v) => assignment
            .get(v)
            .copied()
            .ok_or_else(|| Error::UnboundVariable(v.clone())),
        Term::App(op, args) => {
            let (k, decl) = alg.signature.op(op).ok_or_else(|| Error::UnknownSymbol {
                kind: "operation",
                name: op.clone(),
            })?;
            if decl.args.len() != args.len() {
                return Err(Error::ArityMismatch {
                    name: op.clone(),
                    expected: decl.args.len(),
                    found: args.len(),
                });
            }
            let vals = args
                .iter()
                .map(|a| eval_term(alg, assignment, a))
                .collect::<Result<Vec<_>>>()?;
            Ok(alg.apply(k, &vals))
        }
    }
}

/// A homomorphism `s: W(X) → W(Y)`, given by the image of each variable of `X`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Substitution {
    source: VarContext,
    target: VarContext,
    map: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new<I>(source: VarContext, target: VarContext, map: I, sig: &Signature) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Term)>,
    {
        let map: BTreeMap<String, Term> = map.into_iter().collect();
        for name in map.keys() {
            if !source.contains(name) {
                return Err(Error::ContextMismatch(format!(
                    "substitution maps `{name}`, which is not a source variable"
                )));
            }
        }
        for (name, sort) in source.vars() {
            let t = map
                .get(name)
                .ok_or_else(|| Error::ContextMismatch(format!("substitution is not defined on `{name}`")))?;
            let found = t.sort_in(&target, sig)?;
            if &found != sort {
                return Err(Error::SortMismatch {
                    place: format!("image of `{name}`"),
                    expected: sort.clone(),
                    found,
                });
            }
        }
        Ok(Substitution { source, target, map })
    }

    pub fn identity(ctx: &VarContext) -> Self {
        Substitution {
            source: ctx.clone(),
            target: ctx.clone(),
            map: ctx.names().map(|n| (n.to_string(), Term::var(n))).collect(),
        }
    }

    /// The inclusion `x ↦ x` of a subcontext into a larger context.
    pub fn inclusion(source: &VarContext, target: &VarContext) -> Result<Self> {
        if !source.is_subcontext_of(target) {
            return Err(Error::ContextMismatch(format!(
                "{{{source}}} is not contained in {{{target}}}"
            )));
        }
        Ok(Substitution {
            source: source.clone(),
            target: target.clone(),
            map: source.names().map(|n| (n.to_string(), Term::var(n))).collect(),
        })
    }

    pub fn source(&self) -> &VarContext {
        &self.source
    }

    pub fn target(&self) -> &VarContext {
        &self.target
    }

    pub fn image(&self, var: &str) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn images(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().all(|(k, v)| *v == Term::Var(k.clone()))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}:={v}")?;
        }
        f.write_str("]")
    }
}

/// Applies `s` homomorphically to a term over `s.source`.
pub fn apply_subst_term(s: &Substitution, term: &Term) -> Result<Term> {
    match term {
        Term::Var(v) => s
            .map
            .get(v)
            .cloned()
            .ok_or_else(|| Error::ContextMismatch(format!("variable `{v}` is outside the substitution's source"))),
        Term::App(op, args) => Ok(Term::App(
            op.clone(),
            args.iter().map(|a| apply_subst_term(s, a)).collect::<Result<_>>()?,
        )),
    }
}

/// `s2 ∘ s1`: first `s1: X → Y`, then `s2: Y → Z`.
pub fn compose_subst(s1: &Substitution, s2: &Substitution) -> Result<Substitution> {
    if s1.target != s2.source {
        return Err(Error::ContextMismatch(format!(
            "cannot compose: target {{{}}} differs from source {{{}}}",
            s1.target, s2.source
        )));
    }
    let map = s1
        .map
        .iter()
        .map(|(k, t)| Ok((k.clone(), apply_subst_term(s2, t)?)))
        .collect::<Result<_>>()?;
    Ok(Substitution {
        source: s1.source.clone(),
        target: s2.target.clone(),
        map,
    })
}

/// All terms over `ctx` of depth at most `depth`, grouped by sort index and
/// ordered by depth, then by printed form.
pub fn enumerate_terms(sig: &Signature, ctx: &VarContext, depth: usize) -> Result<Vec<Vec<Term>>> {
    ctx.check(sig)?;
    let mut by_sort: Vec<Vec<Term>> = vec![Vec::new(); sig.sorts.len()];
    for (name, sort) in ctx.vars() {
        by_sort[sig.require_sort(sort)?].push(Term::var(name));
    }
    for _ in 0..depth {
        let mut next: Vec<Vec<Term>> = vec![Vec::new(); sig.sorts.len()];
        for op in &sig.ops {
            let arg_sorts = op
                .args
                .iter()
                .map(|s| sig.require_sort(s))
                .collect::<Result<Vec<_>>>()?;
            let res = sig.require_sort(&op.result)?;
            let pools: Vec<&Vec<Term>> = arg_sorts.iter().map(|&s| &by_sort[s]).collect();
            let radices: Vec<usize> = pools.iter().map(|p| p.len()).collect();
            let mut seen_here = BTreeSet::new();
            super::for_each_tuple(&radices, |idx| {
                let args: Vec<Term> = idx.iter().zip(&pools).map(|(&i, p)| p[i].clone()).collect();
                let t = Term::App(op.name.clone(), args);
                if seen_here.insert(t.clone()) {
                    next[res].push(t);
                }
            });
        }
        for (s, terms) in next.iter_mut().enumerate() {
            terms.retain(|t| !by_sort[s].contains(t));
        }
        for (s, terms) in next.iter().enumerate() {
            by_sort[s].extend(terms.iter().cloned());
        }
    }
    for terms in &mut by_sort {
        terms.sort_by_cached_key(|t| (t.depth(), t.to_string()));
    }
    Ok(by_sort)
}
