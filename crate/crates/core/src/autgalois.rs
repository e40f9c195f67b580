//! Galois–Krasner theory for finite models.
//!
//! Automorphisms `δ` of `G` act on every point space by `μ ↦ δ∘μ` and on
//! point sets by `δ_* A = { μ : δ∘μ ∈ A }`. For a group `H` the invariant
//! sets are `H′`; for a family of sets `R` the stabilizing automorphisms are
//! `R′`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::algebra::{aut_group, find_isomorphisms, AlgebraMap, FiniteAlgebra, Group, Substitution, VarContext};
use crate::error::{Error, Result};
use crate::galois::DefinableFamily;
use crate::geometry::{exists_quant, subst_pushforward, Model, PointSet, PointSpace};

/// `Aut(f)`: automorphisms of `G` mapping every `f(φ)` onto itself.
pub fn aut_model(model: &Model) -> Group {
    let alg = model.algebra();
    let sig = model.signature();
    let arg_sorts: Vec<Vec<usize>> = sig
        .rels
        .iter()
        .map(|r| {
            r.args
                .iter()
                .map(|s| sig.sort_index(s).expect("valid signature"))
                .collect()
        })
        .collect();
    let keeps = |d: &AlgebraMap| {
        (0..sig.rels.len()).all(|k| {
            model.relation(k).iter().all(|t| {
                let image: Vec<usize> = t.iter().zip(&arg_sorts[k]).map(|(&e, &s)| d.apply(s, e)).collect();
                model.relation(k).contains(&image)
            })
        })
    };
    Group::from_elements(aut_group(alg).elements().iter().filter(|d| keeps(d)).cloned())
}

fn check_map_shape(delta: &AlgebraMap, alg: &FiniteAlgebra) -> Result<()> {
    let ok = delta.per_sort().len() == alg.carriers.len()
        && delta.per_sort().iter().zip(&alg.carriers).all(|(m, &n)| m.len() == n)
        && delta.is_bijective();
    if ok {
        Ok(())
    } else {
        Err(Error::Other(
            "map is not a permutation of the algebra's carriers".into(),
        ))
    }
}

/// Index of `δ∘μ` for every point index `μ` of `space`.
pub fn induced_point_map(delta: &AlgebraMap, space: &PointSpace) -> Result<Vec<usize>> {
    if delta.per_sort().len() != space.algebra().carriers.len()
        || delta
            .per_sort()
            .iter()
            .zip(&space.algebra().carriers)
            .any(|(m, &n)| m.len() != n)
    {
        return Err(Error::Other("map does not fit the algebra of the space".into()));
    }
    let sorts = space.sorts();
    Ok((0..space.size())
        .map(|i| {
            (0..sorts.len()).fold(0, |acc, c| {
                acc * space.radices()[c] + delta.apply(sorts[c], space.digit(i, c))
            })
        })
        .collect())
}

/// `δ_* A = { μ : δ∘μ ∈ A }`.
pub fn act_on_pointset(delta: &AlgebraMap, a: &PointSet) -> Result<PointSet> {
    check_map_shape(delta, a.space().algebra())?;
    let map = induced_point_map(delta, a.space())?;
    Ok(PointSet::from_predicate(a.space(), |i| a.contains(map[i])))
}

/// Orbits of `H` on the points of `space`, each as a set, ordered by their
/// least point index.
pub fn orbits(h: &Group, space: &Arc<PointSpace>) -> Result<Vec<PointSet>> {
    let maps = h
        .elements()
        .iter()
        .map(|d| induced_point_map(d, space))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = vec![false; space.size()];
    let mut out = Vec::new();
    for start in 0..space.size() {
        if seen[start] {
            continue;
        }
        let mut orbit = space.empty_set();
        for m in &maps {
            let j = m[start];
            seen[j] = true;
            orbit.insert(j);
        }
        seen[start] = true;
        orbit.insert(start);
        out.push(orbit);
    }
    Ok(out)
}

/// `H′` at one context: all unions of `H`-orbits.
pub fn invariant_sets(h: &Group, space: &Arc<PointSpace>) -> Result<DefinableFamily> {
    Ok(DefinableFamily::from_blocks(space.full_set(), orbits(h, space)?))
}

/// `R′` relative to `ambient`: the elements fixing every set of `sets`.
pub fn stabilizer_of_family(ambient: &Group, sets: &[PointSet]) -> Result<Group> {
    let mut keep = Vec::new();
    'outer: for d in ambient.elements() {
        for a in sets {
            if act_on_pointset(d, a)? != *a {
                continue 'outer;
            }
        }
        keep.push(d.clone());
    }
    Ok(Group::from_elements(keep))
}

/// Contexts of up to `bound` variables named `x, y, z, …`, every sort
/// assignment up to reordering, plus the context with one variable per
/// element of `G` when `G` has at most four elements in total.
pub fn probe_contexts(alg: &FiniteAlgebra, bound: usize) -> Result<Vec<VarContext>> {
    let mut out = crate::galois::standard_contexts(&alg.signature, bound)?;
    let total: usize = alg.carriers.iter().sum();
    if total <= 4 && total > 0 {
        let mut vars = Vec::new();
        for (s, &n) in alg.carriers.iter().enumerate() {
            for e in 0..n {
                vars.push((format!("g{s}_{e}"), alg.signature.sorts[s].clone()));
            }
        }
        out.push(VarContext::new(vars)?);
    }
    Ok(out)
}

/// `H″`: the automorphisms of `G` fixing every `H`-invariant set over the
/// probe contexts.
pub fn double_closure_subgroup(alg: &Arc<FiniteAlgebra>, h: &Group, context_bound: usize) -> Result<Group> {
    let mut sets = Vec::new();
    for ctx in probe_contexts(alg, context_bound)? {
        let space = PointSpace::new(ctx, Arc::clone(alg))?;
        // Fixing every union of orbits is the same as fixing every orbit.
        sets.extend(orbits(h, &space)?);
    }
    stabilizer_of_family(&aut_group(alg), &sets)
}

/// The first isomorphism `δ: a1 → a2` in lexicographic order with
/// `δ H1 δ⁻¹ = H2`.
pub fn conjugating_iso(a1: &FiniteAlgebra, a2: &FiniteAlgebra, h1: &Group, h2: &Group) -> Option<AlgebraMap> {
    if h1.order() != h2.order() {
        return None;
    }
    find_isomorphisms(a1, a2)
        .into_iter()
        .find(|d| h1.conjugate_by(d) == *h2)
}

/// A permutation `τ` of the points of one space.
#[derive(Clone, Debug)]
pub struct PointSubstitution {
    space: Arc<PointSpace>,
    map: Vec<usize>,
}

impl PartialEq for PointSubstitution {
    fn eq(&self, other: &Self) -> bool {
        self.space.same_shape(&other.space) && self.map == other.map
    }
}

impl Eq for PointSubstitution {}

impl PointSubstitution {
    pub fn new(space: &Arc<PointSpace>, map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; space.size()];
        let bijective = map.len() == space.size()
            && map
                .iter()
                .all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true));
        if !bijective {
            return Err(Error::Other(format!(
                "not a permutation of the {} points of {{{}}}",
                space.size(),
                space.context()
            )));
        }
        Ok(PointSubstitution {
            space: Arc::clone(space),
            map,
        })
    }

    pub fn identity(space: &Arc<PointSpace>) -> Self {
        PointSubstitution {
            space: Arc::clone(space),
            map: (0..space.size()).collect(),
        }
    }

    /// `μ ↦ δ∘μ`.
    pub fn from_automorphism(space: &Arc<PointSpace>, delta: &AlgebraMap) -> Result<Self> {
        check_map_shape(delta, space.algebra())?;
        Self::new(space, induced_point_map(delta, space)?)
    }

    /// Coordinate-wise action: `(τμ)(x) = ζ_x(μ(x))`, one permutation per
    /// context variable.
    pub fn from_coordinates(space: &Arc<PointSpace>, zeta: &[Vec<usize>]) -> Result<Self> {
        if zeta.len() != space.radices().len() || zeta.iter().zip(space.radices()).any(|(z, &r)| z.len() != r) {
            return Err(Error::Other("one permutation per coordinate expected".into()));
        }
        let map = (0..space.size())
            .map(|i| (0..zeta.len()).fold(0, |acc, c| acc * space.radices()[c] + zeta[c][space.digit(i, c)]))
            .collect();
        Self::new(space, map)
    }

    pub fn space(&self) -> &Arc<PointSpace> {
        &self.space
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, index: usize) -> usize {
        self.map[index]
    }

    /// `{ μ : τμ ∈ A }`.
    pub fn act(&self, a: &PointSet) -> Result<PointSet> {
        let own = self.space.full_set();
        own.check_same_space(a)?;
        Ok(PointSet::from_predicate(&self.space, |i| a.contains(self.map[i])))
    }

    /// `μ(x) = ν(x) ⇔ (τμ)(x) = (τν)(x)` for all points and variables.
    pub fn is_correct(&self) -> bool {
        let n = self.space.size();
        let coords = self.space.radices().len();
        (0..coords).all(|c| {
            (0..n).all(|i| {
                (i..n).all(|j| {
                    let before = self.space.digit(i, c) == self.space.digit(j, c);
                    let after = self.space.digit(self.map[i], c) == self.space.digit(self.map[j], c);
                    before == after
                })
            })
        })
    }

    /// Coordinate permutations `ζ_x` with `τ` acting as `μ ↦ (ζ_x μ(x))_x`,
    /// when they exist.
    pub fn decompose(&self) -> Option<Vec<Vec<usize>>> {
        let coords = self.space.radices().len();
        let mut zeta: Vec<Vec<usize>> = self.space.radices().iter().map(|&r| vec![usize::MAX; r]).collect();
        for i in 0..self.space.size() {
            let j = self.map[i];
            for (c, z) in zeta.iter_mut().enumerate().take(coords) {
                let (a, b) = (self.space.digit(i, c), self.space.digit(j, c));
                if z[a] == usize::MAX {
                    z[a] = b;
                } else if z[a] != b {
                    return None;
                }
            }
        }
        let all_bijective = zeta.iter().all(|z| {
            let distinct: BTreeSet<usize> = z.iter().copied().collect();
            distinct.len() == z.len() && !distinct.contains(&usize::MAX)
        });
        all_bijective.then_some(zeta)
    }

    /// `τ_*(∃x A) = ∃x(τ_* A)` for every `A`, checked on singletons (both
    /// sides are additive in `A`).
    pub fn commutes_with_exists(&self, x: &str) -> Result<bool> {
        for p in 0..self.space.size() {
            let a = PointSet::from_indices(&self.space, [p])?;
            if self.act(&exists_quant(&a, x)?)? != exists_quant(&self.act(&a)?, x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn commutes_with_all_quantifiers(&self) -> Result<bool> {
        for name in self.space.context().names() {
            if !self.commutes_with_exists(name)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `s_*(τ_* A) = τ'_*(s_* A)` for every `A` over the source of `s`, with
    /// `self` on the source space and `other` on the target space.
    pub fn commutes_with_subst(&self, other: &PointSubstitution, s: &Substitution) -> Result<bool> {
        if self.space.context() != s.source() || other.space.context() != s.target() {
            return Err(Error::ContextMismatch(format!(
                "substitution {{{}}} → {{{}}} between {{{}}} and {{{}}}",
                s.source(),
                s.target(),
                self.space.context(),
                other.space.context()
            )));
        }
        for p in 0..self.space.size() {
            let a = PointSet::from_indices(&self.space, [p])?;
            let left = subst_pushforward(s, &self.act(&a)?)?;
            let right = other.act(&subst_pushforward(s, &a)?.rehome(&other.space)?)?;
            if left != right {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
