//! Knowledge objects, multimodels and knowledge bases.
//!
//! A description `(X, T)` is a query; its content `T^f` is the reply. Two
//! knowledge bases over finite multimodels are informationally equivalent
//! exactly when their instances can be matched so that matched models are
//! automorphically equivalent, which is what [`kb_equivalent`] decides.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::algebra::{AlgebraMap, FiniteAlgebra, Substitution, VarContext};
use crate::autgalois::{aut_model, conjugating_iso, induced_point_map};
use crate::error::{Error, Result, Violation};
use crate::formula::apply_subst_formula;
use crate::galois::{in_set_theory, rf_family, standard_contexts, theory_value, RfConfig, Theory};
use crate::geometry::{exists_quant, subst_point_map, subst_pushforward, Model, PointSet};

/// `(X, T, A)` with `A = T^f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeObject {
    pub description: Theory,
    pub content: PointSet,
}

impl KnowledgeObject {
    pub fn context(&self) -> &VarContext {
        self.description.context()
    }

    /// Recomputes the content against `model`.
    pub fn is_consistent_with(&self, model: &Model) -> Result<bool> {
        Ok(theory_value(model, &self.description)? == self.content)
    }
}

/// `Ct_f(X, T) = (X, T^f)`.
pub fn ct(model: &Model, x: &VarContext, t: &Theory) -> Result<KnowledgeObject> {
    if t.context() != x {
        return Err(Error::ContextMismatch(format!(
            "theory over {{{}}} used at {{{x}}}",
            t.context()
        )));
    }
    Ok(KnowledgeObject {
        description: t.clone(),
        content: theory_value(model, t)?,
    })
}

/// `(G, Φ, F)`: one algebra with several named interpretations.
#[derive(Clone, Debug)]
pub struct Multimodel {
    algebra: Arc<FiniteAlgebra>,
    instances: Vec<(String, Model)>,
}

impl Multimodel {
    pub fn new(algebra: Arc<FiniteAlgebra>, instances: Vec<(String, Model)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut violations = Vec::new();
        for (name, m) in &instances {
            if !seen.insert(name.clone()) {
                violations.push(Violation::new(format!("instance {name}"), "duplicate instance name"));
            }
            if **m.algebra() != *algebra {
                violations.push(Violation::new(
                    format!("instance {name}"),
                    "interpretation over a different algebra",
                ));
            }
        }
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(Multimodel { algebra, instances })
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.algebra
    }

    pub fn instances(&self) -> &[(String, Model)] {
        &self.instances
    }

    pub fn instance(&self, name: &str) -> Option<&Model> {
        self.instances.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.instances.iter().map(|(n, _)| n.as_str())
    }
}

/// A knowledge base: queries are descriptions, replies are contents.
#[derive(Clone, Debug)]
pub struct KnowledgeBase {
    pub multimodel: Multimodel,
}

impl KnowledgeBase {
    pub fn new(multimodel: Multimodel) -> Self {
        KnowledgeBase { multimodel }
    }

    pub fn query(&self, instance: &str, t: &Theory) -> Result<KnowledgeObject> {
        let m = self.multimodel.instance(instance).ok_or_else(|| Error::UnknownSymbol {
            kind: "instance",
            name: instance.to_string(),
        })?;
        ct(m, t.context(), t)
    }
}

/// `s: W(Y) → W(X)` is admissible for `A ⊆ Hom(W(X), G)` and
/// `B ⊆ Hom(W(Y), G)` when `ν∘s ∈ B` for every `ν ∈ A`.
///
/// Computed pointwise and as `A ⊆ s_* B`; the two must agree.
pub fn admissible_sets(s: &Substitution, a: &PointSet, b: &PointSet) -> Result<bool> {
    if s.target() != a.context() || s.source() != b.context() {
        return Err(Error::ContextMismatch(format!(
            "substitution {{{}}} → {{{}}} for sets over {{{}}} and {{{}}}",
            s.source(),
            s.target(),
            a.context(),
            b.context()
        )));
    }
    let map = subst_point_map(s, a.space(), b.space())?;
    let pointwise = a.indices().all(|i| b.contains(map[i]));
    let via_pushforward = a.is_subset(&subst_pushforward(s, b)?.rehome(a.space())?);
    if pointwise != via_pushforward {
        return Err(Error::Other(format!(
            "admissibility criteria disagree for {s}: pointwise {pointwise}, pushforward {via_pushforward}"
        )));
    }
    Ok(pointwise)
}

/// `s u ∈ (T1^f)^f` for every `u ∈ T2`, with `T1` over `X = s.target()` and
/// `T2` over `Y = s.source()`.
pub fn admissible_theories(model: &Model, s: &Substitution, t1: &Theory, t2: &Theory) -> Result<bool> {
    if s.target() != t1.context() || s.source() != t2.context() {
        return Err(Error::ContextMismatch(format!(
            "substitution {{{}}} → {{{}}} for theories over {{{}}} and {{{}}}",
            s.source(),
            s.target(),
            t1.context(),
            t2.context()
        )));
    }
    let a = theory_value(model, t1)?;
    for u in t2.formulas() {
        if !in_set_theory(model, &a, &apply_subst_formula(s, u)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An isomorphism `δ: G1 → G2` with `Aut(f2) = δ Aut(f1) δ⁻¹`, if any.
pub fn models_automorphic_equivalent(m1: &Model, m2: &Model) -> Option<AlgebraMap> {
    conjugating_iso(m1.algebra(), m2.algebra(), &aut_model(m1), &aut_model(m2))
}

/// A bijection of instances with a conjugating isomorphism per instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub alpha: BTreeMap<String, String>,
    pub deltas: BTreeMap<String, AlgebraMap>,
}

impl EquivalenceWitness {
    /// Re-checks bijectivity and every conjugacy equation element by element.
    pub fn verify(&self, kb1: &KnowledgeBase, kb2: &KnowledgeBase) -> bool {
        let m1 = &kb1.multimodel;
        let m2 = &kb2.multimodel;
        let targets: BTreeSet<&String> = self.alpha.values().collect();
        if self.alpha.len() != m1.instances().len()
            || targets.len() != m2.instances().len()
            || self.alpha.len() != targets.len()
        {
            return false;
        }
        self.alpha.iter().all(|(f, g)| {
            let (Some(a), Some(b), Some(d)) = (m1.instance(f), m2.instance(g), self.deltas.get(f)) else {
                return false;
            };
            if !d.is_bijective() || !d.is_homomorphism(a.algebra(), b.algebra()) {
                return false;
            }
            let h1 = aut_model(a);
            let h2 = aut_model(b);
            let inv = d.inverse();
            h1.order() == h2.order() && h1.elements().iter().all(|h| h2.contains(&d.after(&h.after(&inv))))
        })
    }

    /// `alpha⁻¹` with `δ⁻¹` per instance.
    pub fn inverse(&self) -> EquivalenceWitness {
        EquivalenceWitness {
            alpha: self.alpha.iter().map(|(f, g)| (g.clone(), f.clone())).collect(),
            deltas: self
                .alpha
                .iter()
                .map(|(f, g)| (g.clone(), self.deltas[f].inverse()))
                .collect(),
        }
    }
}

/// Decides informational equivalence of two finite knowledge bases.
///
/// Instances are matched by backtracking in name order on both sides; a pair
/// is compatible when its models are automorphically equivalent.
pub fn kb_equivalent(kb1: &KnowledgeBase, kb2: &KnowledgeBase) -> Option<EquivalenceWitness> {
    let mut left: Vec<(&String, &Model)> = kb1.multimodel.instances().iter().map(|(n, m)| (n, m)).collect();
    let mut right: Vec<(&String, &Model)> = kb2.multimodel.instances().iter().map(|(n, m)| (n, m)).collect();
    if left.len() != right.len() {
        return None;
    }
    left.sort_by(|a, b| a.0.cmp(b.0));
    right.sort_by(|a, b| a.0.cmp(b.0));
    let edges: Vec<Vec<Option<AlgebraMap>>> = left
        .iter()
        .map(|(_, a)| right.iter().map(|(_, b)| models_automorphic_equivalent(a, b)).collect())
        .collect();

    fn search(i: usize, edges: &[Vec<Option<AlgebraMap>>], used: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        if i == edges.len() {
            return true;
        }
        for j in 0..used.len() {
            if !used[j] && edges[i][j].is_some() {
                used[j] = true;
                chosen.push(j);
                if search(i + 1, edges, used, chosen) {
                    return true;
                }
                chosen.pop();
                used[j] = false;
            }
        }
        false
    }

    let mut used = vec![false; right.len()];
    let mut chosen = Vec::new();
    if !search(0, &edges, &mut used, &mut chosen) {
        return None;
    }
    let mut alpha = BTreeMap::new();
    let mut deltas = BTreeMap::new();
    for (i, &j) in chosen.iter().enumerate() {
        alpha.insert(left[i].0.clone(), right[j].0.clone());
        deltas.insert(left[i].0.clone(), edges[i][j].clone().expect("edge exists"));
    }
    Some(EquivalenceWitness { alpha, deltas })
}

/// Outcome of [`induced_gamma_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaReport {
    pub contexts_checked: usize,
    pub failures: Vec<String>,
}

impl GammaReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn names_of(ctx: &VarContext) -> String {
    format!("{{{}}}", ctx.names().collect::<Vec<_>>().join(", "))
}

/// Checks that `δ̃: A ↦ {δ∘μ : μ ∈ A}` maps `R_f1(X)` onto `R_f2(X)` for
/// every context up to `context_bound`, and that it commutes with `∪`, `¬`
/// and every `∃x` on up to `samples` members per context.
pub fn induced_gamma_check(
    delta: &AlgebraMap,
    m1: &Model,
    m2: &Model,
    context_bound: usize,
    samples: usize,
    cfg: &RfConfig,
) -> Result<GammaReport> {
    if !delta.is_bijective() || !delta.is_homomorphism(m1.algebra(), m2.algebra()) {
        return Err(Error::Other("map is not an isomorphism of the algebras".into()));
    }
    let mut report = GammaReport {
        contexts_checked: 0,
        failures: Vec::new(),
    };
    for ctx in standard_contexts(m1.signature(), context_bound)? {
        report.contexts_checked += 1;
        let r1 = rf_family(m1, &ctx, cfg)?;
        let r2 = rf_family(m2, &ctx, cfg)?;
        let at = names_of(&ctx);
        if r1.block_count() != r2.block_count() {
            report.failures.push(format!(
                "families have different sizes: {} vs {} at {at}",
                r1.len(),
                r2.len()
            ));
            continue;
        }
        let map = induced_point_map(delta, r1.space())?;
        let space2 = r2.space().clone();
        let image = |a: &PointSet| -> PointSet {
            let mut out = space2.empty_set();
            for i in a.indices() {
                out.insert(map[i]);
            }
            out
        };
        let mut images: Vec<PointSet> = r1.blocks().iter().map(&image).collect();
        images.sort_by_key(|b| b.indices().next());
        if images != r2.blocks() {
            report
                .failures
                .push(format!("image of the first family is not the second family at {at}"));
            continue;
        }
        let b = r1.block_count().min(63);
        let total = 1u64 << b;
        let step = (total / samples.max(1) as u64).max(1);
        let masks: Vec<u64> = (0..samples as u64).map(|k| k * step).filter(|&m| m < total).collect();
        'samples: for (k, &m) in masks.iter().enumerate() {
            let a = r1.member(m);
            let other = r1.member(masks[(k + 1) % masks.len()]);
            let ga = image(&a);
            if image(&a.union(&other)) != ga.union(&image(&other)) {
                report.failures.push(format!("union not preserved at {at}"));
                break;
            }
            if image(&a.complement()) != ga.complement() {
                report.failures.push(format!("complement not preserved at {at}"));
                break;
            }
            for x in ctx.names() {
                if image(&exists_quant(&a, x)?) != exists_quant(&ga, x)? {
                    report.failures.push(format!("∃{x} not preserved at {at}"));
                    break 'samples;
                }
            }
        }
    }
    Ok(report)
}
