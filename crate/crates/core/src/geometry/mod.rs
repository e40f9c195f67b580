//! Point spaces, the quantifier algebra of point sets, and evaluation.
//!
//! `Bool(W(X), G)` is the Boolean algebra of subsets of the affine space
//! `Hom(W(X), G)`, carrying the quantifiers `∃x` and, for each substitution
//! `s: W(X) → W(Y)`, the Boolean homomorphism `s_*` and the image map `s^*`.
//! [`eval_formula`] is the evaluation homomorphism `Val_f` into it, computed
//! set-at-a-time.

mod space;

pub use space::{Point, PointSet, PointSpace, DEFAULT_MAX_POINTS};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::algebra::{FiniteAlgebra, Signature, Substitution, VarContext};
use crate::error::{Error, Result, Violation};
use crate::formula::{Formula, TypedFormula};

/// A model `(G, Φ, f)`: an algebra with an interpretation of every relation
/// symbol of its signature.
#[derive(Clone, Debug)]
pub struct Model {
    algebra: Arc<FiniteAlgebra>,
    relations: Vec<BTreeSet<Vec<usize>>>,
    membership: Vec<FixedBitSet>,
    max_points: usize,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.relations == other.relations
    }
}

impl Eq for Model {}

impl Model {
    /// Relations not mentioned in `interp` are interpreted as empty.
    pub fn new<I, T>(algebra: Arc<FiniteAlgebra>, interp: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, T)>,
        T: IntoIterator<Item = Vec<usize>>,
    {
        let sig = &algebra.signature;
        let mut relations: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); sig.rels.len()];
        let mut violations = Vec::new();
        for (name, tuples) in interp {
            let Some((k, decl)) = sig.rel(&name) else {
                return Err(Error::UnknownSymbol { kind: "relation", name });
            };
            let radices: Vec<usize> = decl
                .args
                .iter()
                .map(|s| algebra.carriers[sig.sort_index(s).expect("valid signature")])
                .collect();
            for t in tuples {
                if t.len() != radices.len() {
                    violations.push(Violation::new(
                        format!("rel {name}"),
                        format!("tuple {t:?} has arity {}, expected {}", t.len(), radices.len()),
                    ));
                } else if let Some((i, &e)) = t.iter().enumerate().find(|&(i, &e)| e >= radices[i]) {
                    violations.push(Violation::new(
                        format!("rel {name}"),
                        format!(
                            "element {e} out of range for sort {} of size {}",
                            decl.args[i], radices[i]
                        ),
                    ));
                } else {
                    relations[k].insert(t);
                }
            }
        }
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let membership = sig
            .rels
            .iter()
            .zip(&relations)
            .map(|(decl, tuples)| {
                let radices: Vec<usize> = decl
                    .args
                    .iter()
                    .map(|s| algebra.carriers[sig.sort_index(s).expect("valid signature")])
                    .collect();
                let size: usize = radices.iter().product();
                let mut bits = FixedBitSet::with_capacity(size);
                for t in tuples {
                    bits.insert(tuple_index(&radices, t));
                }
                bits
            })
            .collect();
        Ok(Model {
            algebra,
            relations,
            membership,
            max_points: DEFAULT_MAX_POINTS,
        })
    }

    pub fn with_point_cap(mut self, cap: usize) -> Self {
        self.max_points = cap;
        self
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.algebra
    }

    pub fn signature(&self) -> &Signature {
        &self.algebra.signature
    }

    pub fn point_cap(&self) -> usize {
        self.max_points
    }

    /// `f(φ)` for the relation at index `k` of the signature.
    pub fn relation(&self, k: usize) -> &BTreeSet<Vec<usize>> {
        &self.relations[k]
    }

    pub fn relation_named(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.signature().rel(name).map(|(k, _)| &self.relations[k])
    }

    pub fn holds(&self, k: usize, tuple: &[usize]) -> bool {
        let sig = self.signature();
        let radices: Vec<usize> = sig.rels[k]
            .args
            .iter()
            .map(|s| self.algebra.carriers[sig.sort_index(s).expect("valid signature")])
            .collect();
        self.membership[k].contains(tuple_index(&radices, tuple))
    }

    pub fn space(&self, context: &VarContext) -> Result<Arc<PointSpace>> {
        PointSpace::with_cap(context.clone(), Arc::clone(&self.algebra), self.max_points)
    }
}

fn tuple_index(radices: &[usize], t: &[usize]) -> usize {
    t.iter().zip(radices).fold(0, |acc, (&e, &r)| acc * r + e)
}

/// Mixed-radix index of a point; the inverse is [`index_point`].
pub fn point_index(space: &PointSpace, p: &Point) -> Result<usize> {
    space.point_index(p)
}

pub fn index_point(space: &PointSpace, index: usize) -> Point {
    space.index_point(index)
}

/// `Val_f(u)`.
pub fn eval_formula(model: &Model, u: &TypedFormula) -> Result<PointSet> {
    u.body.check(&u.context, model.signature())?;
    let space = model.space(&u.context)?;
    eval_in(model, &u.body, &space)
}

fn eval_in(model: &Model, f: &Formula, space: &Arc<PointSpace>) -> Result<PointSet> {
    Ok(match f {
        Formula::Equal(a, b) => {
            let ca = space.term_column(a)?;
            let cb = space.term_column(b)?;
            PointSet::from_predicate(space, |i| ca[i] == cb[i])
        }
        Formula::Rel(name, args) => {
            let (k, _) = model.signature().rel(name).ok_or_else(|| Error::UnknownSymbol {
                kind: "relation",
                name: name.clone(),
            })?;
            let cols = args.iter().map(|a| space.term_column(a)).collect::<Result<Vec<_>>>()?;
            let mut buf = vec![0; cols.len()];
            PointSet::from_predicate(space, |i| {
                for (b, c) in buf.iter_mut().zip(&cols) {
                    *b = c[i];
                }
                model.holds(k, &buf)
            })
        }
        Formula::Or(a, b) => eval_in(model, a, space)?.union(&eval_in(model, b, space)?),
        Formula::And(a, b) => eval_in(model, a, space)?.intersection(&eval_in(model, b, space)?),
        Formula::Not(a) => eval_in(model, a, space)?.complement(),
        Formula::Exists(x, a) => exists_quant(&eval_in(model, a, space)?, x)?,
        Formula::Subst(s, body) => {
            let source = model.space(s.source())?;
            let inner = eval_in(model, body, &source)?;
            subst_pushforward(s, &inner)?.rehome(space)?
        }
    })
}

/// `∃x A`: the cylinder of `A` along the `x` axis.
pub fn exists_quant(a: &PointSet, x: &str) -> Result<PointSet> {
    let space = a.space();
    let i = space.var_position(x)?;
    let stride = space.strides()[i];
    let radix = space.radices()[i];
    let block = stride * radix;
    let mut out = space.empty_set();
    let mut base_block = 0;
    while base_block < space.size() {
        for off in 0..stride {
            let base = base_block + off;
            if (0..radix).any(|d| a.contains(base + d * stride)) {
                for d in 0..radix {
                    out.insert(base + d * stride);
                }
            }
        }
        base_block += block;
    }
    Ok(out)
}

/// `∃x1 … ∃xk A` over the listed variables.
pub fn exists_many<'a>(a: &PointSet, vars: impl IntoIterator<Item = &'a str>) -> Result<PointSet> {
    let mut cur = a.clone();
    for v in vars {
        cur = exists_quant(&cur, v)?;
    }
    Ok(cur)
}

/// The map `s̃: Hom(W(Y), G) → Hom(W(X), G)`, `ν ↦ ν∘s`, as point indices.
pub fn subst_point_map(s: &Substitution, target: &PointSpace, source: &PointSpace) -> Result<Vec<usize>> {
    if target.context() != s.target() || source.context() != s.source() {
        return Err(Error::ContextMismatch(format!(
            "substitution {{{}}} → {{{}}} used between spaces {{{}}} and {{{}}}",
            s.source(),
            s.target(),
            source.context(),
            target.context()
        )));
    }
    let mut out = vec![0; target.size()];
    for (pos, (name, _)) in source.context().vars().iter().enumerate() {
        let term = s.image(name).expect("substitution is total");
        let col = target.term_column(term)?;
        let stride = source.strides()[pos];
        for (o, v) in out.iter_mut().zip(col) {
            *o += v * stride;
        }
    }
    Ok(out)
}

/// `s_* A = { ν : ν∘s ∈ A }`, a set over `s.target()`.
pub fn subst_pushforward(s: &Substitution, a: &PointSet) -> Result<PointSet> {
    if a.context() != s.source() {
        return Err(Error::ContextMismatch(format!(
            "set over {{{}}}, substitution source {{{}}}",
            a.context(),
            s.source()
        )));
    }
    let target = PointSpace::with_cap(s.target().clone(), Arc::clone(a.space().algebra()), a.space().cap())?;
    let map = subst_point_map(s, &target, a.space())?;
    Ok(PointSet::from_predicate(&target, |i| a.contains(map[i])))
}

/// `s^* B = { ν∘s : ν ∈ B }`, a set over `s.source()`.
pub fn subst_image(s: &Substitution, b: &PointSet) -> Result<PointSet> {
    if b.context() != s.target() {
        return Err(Error::ContextMismatch(format!(
            "set over {{{}}}, substitution target {{{}}}",
            b.context(),
            s.target()
        )));
    }
    let source = PointSpace::with_cap(s.source().clone(), Arc::clone(b.space().algebra()), b.space().cap())?;
    let map = subst_point_map(s, b.space(), &source)?;
    let mut out = source.empty_set();
    for i in b.indices() {
        out.insert(map[i]);
    }
    Ok(out)
}

/// `u ∈ LogKer(μ)`.
pub fn in_log_kernel(model: &Model, p: &Point, u: &TypedFormula) -> Result<bool> {
    let val = eval_formula(model, u)?;
    Ok(val.contains(val.space().point_index(p)?))
}

/// `Δu = { x : ∃x Val(u) ≠ Val(u) }`.
pub fn semantic_support(model: &Model, u: &TypedFormula) -> Result<BTreeSet<String>> {
    let val = eval_formula(model, u)?;
    support_of_set(&val)
}

/// Variables along which a point set is not a cylinder.
pub fn support_of_set(a: &PointSet) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for name in a.context().names() {
        if exists_quant(a, name)? != *a {
            out.insert(name.to_string());
        }
    }
    Ok(out)
}

/// Convenience for building interpretations: relation name to tuples.
pub type Interpretation = BTreeMap<String, Vec<Vec<usize>>>;
