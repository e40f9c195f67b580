//! The Galois correspondence between theories and point sets.
//!
//! For a theory `T` over `X`, `T^f` is the intersection of the values of its
//! formulas; for a point set `A`, `A^f` is the set of formulas whose value
//! contains `A`. `A^f` and `T^ff` are infinite as formula sets and are only
//! exposed through membership tests; the closed set `A^ff` is computed
//! directly.
//!
//! [`rf_family`] computes `R_f(X)`, the Boolean algebra of definable subsets
//! of `Hom(W(X), G)`, as a partition of the space into blocks: the family is
//! exactly the set of unions of blocks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::algebra::{enumerate_terms, Signature, Term, VarContext};
use crate::autgalois::{aut_model, orbits};
use crate::error::{Error, Result};
use crate::formula::{parse_formula, Formula, FreshNames, TypedFormula};
use crate::geometry::{eval_formula, exists_quant, Model, PointSet, PointSpace};

/// A finite theory: formulas over one shared context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    context: VarContext,
    formulas: Vec<TypedFormula>,
}

impl Theory {
    pub fn new(context: VarContext, formulas: Vec<TypedFormula>) -> Result<Self> {
        if let Some(u) = formulas.iter().find(|u| u.context != context) {
            return Err(Error::ContextMismatch(format!(
                "formula `{u}` is over {{{}}}, theory over {{{context}}}",
                u.context
            )));
        }
        Ok(Theory { context, formulas })
    }

    pub fn empty(context: VarContext) -> Self {
        Theory {
            context,
            formulas: Vec::new(),
        }
    }

    /// One formula per item, in the concrete formula syntax.
    pub fn parse<'a>(context: &VarContext, texts: impl IntoIterator<Item = &'a str>, sig: &Signature) -> Result<Self> {
        let formulas = texts
            .into_iter()
            .map(|t| parse_formula(t, context, sig))
            .collect::<Result<Vec<_>>>()?;
        Theory::new(context.clone(), formulas)
    }

    pub fn context(&self) -> &VarContext {
        &self.context
    }

    pub fn formulas(&self) -> &[TypedFormula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn push(&mut self, u: TypedFormula) -> Result<()> {
        if u.context != self.context {
            return Err(Error::ContextMismatch(format!(
                "formula `{u}` is over {{{}}}, theory over {{{}}}",
                u.context, self.context
            )));
        }
        self.formulas.push(u);
        Ok(())
    }
}

/// `{u1; u2; …}`.
impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, u) in self.formulas.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{u}")?;
        }
        f.write_str("}")
    }
}

/// `T^f`.
pub fn theory_value(model: &Model, t: &Theory) -> Result<PointSet> {
    let space = model.space(t.context())?;
    let mut acc = space.full_set();
    for u in t.formulas() {
        acc = acc.intersection(&eval_formula(model, u)?.rehome(&space)?);
    }
    Ok(acc)
}

fn same_context(a: &VarContext, b: &VarContext) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ContextMismatch(format!("{{{a}}} against {{{b}}}")))
    }
}

/// `u ∈ A^f`, that is `A ⊆ Val_f(u)`.
pub fn in_set_theory(model: &Model, a: &PointSet, u: &TypedFormula) -> Result<bool> {
    same_context(a.context(), &u.context)?;
    Ok(a.is_subset(&eval_formula(model, u)?.rehome(a.space())?))
}

/// `v ∈ T^ff`, that is `T^f ⊆ Val_f(v)`.
pub fn in_closure(model: &Model, t: &Theory, v: &TypedFormula) -> Result<bool> {
    same_context(t.context(), &v.context)?;
    let tv = theory_value(model, t)?;
    Ok(tv.is_subset(&eval_formula(model, v)?.rehome(tv.space())?))
}

/// Agreement between the two closure computations of [`set_closure`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossCheck {
    Agreed,
    /// The definable family gave a different least superset.
    Mismatch(PointSet),
    /// The definable family could not be built; the orbit result stands alone.
    Unavailable(String),
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub closure: PointSet,
    /// The `Aut(f)`-orbits making up the closure, by least index.
    pub orbits: Vec<PointSet>,
    pub cross_check: CrossCheck,
}

/// `A^ff`: the union of the `Aut(f)`-orbits meeting `A`, cross-checked
/// against the least definable superset of `A`.
pub fn set_closure(model: &Model, a: &PointSet) -> Result<ClosureReport> {
    match rf_family(model, a.context(), &RfConfig::default()) {
        Ok(family) => set_closure_with(model, a, Some(&family)),
        Err(Error::SpaceTooLarge { size, cap }) => {
            let mut report = set_closure_with(model, a, None)?;
            report.cross_check = CrossCheck::Unavailable(format!("extended space has {size} points, cap is {cap}"));
            Ok(report)
        }
        Err(e) => Err(e),
    }
}

/// [`set_closure`] with a precomputed family for the cross-check.
pub fn set_closure_with(model: &Model, a: &PointSet, family: Option<&DefinableFamily>) -> Result<ClosureReport> {
    let space = model.space(a.context())?;
    let a = a.rehome(&space)?;
    let meeting: Vec<PointSet> = orbits(&aut_model(model), &space)?
        .into_iter()
        .filter(|o| o.intersects(&a))
        .collect();
    let mut closure = space.empty_set();
    for o in &meeting {
        closure = closure.union(o);
    }
    let cross_check = match family {
        None => CrossCheck::Unavailable("no definable family supplied".into()),
        Some(fam) => {
            let least = fam
                .least_superset(&a)
                .ok_or_else(|| Error::ContextMismatch("family over a different space".into()))?;
            if least == closure {
                CrossCheck::Agreed
            } else {
                CrossCheck::Mismatch(least)
            }
        }
    };
    Ok(ClosureReport {
        closure,
        orbits: meeting,
        cross_check,
    })
}

/// Parameters of [`rf_family`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RfConfig {
    /// Extra variables per sort; `None` means the largest carrier size.
    pub budget: Option<usize>,
    pub term_depth: usize,
}

impl Default for RfConfig {
    fn default() -> Self {
        RfConfig {
            budget: None,
            term_depth: 2,
        }
    }
}

/// Comparison of the computed family against the `Aut(f)`-invariant sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Convergence {
    pub block_count: usize,
    pub orbit_count: usize,
}

impl Convergence {
    pub fn converged(&self) -> bool {
        self.block_count == self.orbit_count
    }
}

/// A Boolean algebra of subsets of `universe`, given by its atoms.
///
/// Members are exactly the unions of blocks. The family is closed under
/// complement relative to the universe, union and intersection by
/// construction; families produced by [`rf_family`] are also closed under
/// every `∃x`.
#[derive(Clone, Debug)]
pub struct DefinableFamily {
    universe: PointSet,
    blocks: Vec<PointSet>,
    block_of: Vec<Option<usize>>,
    convergence: Option<Convergence>,
    derivation: Option<Arc<Derivation>>,
}

impl DefinableFamily {
    /// `blocks` must partition `universe`; they are reordered by least index.
    pub fn from_blocks(universe: PointSet, mut blocks: Vec<PointSet>) -> Self {
        blocks.retain(|b| !b.is_empty());
        blocks.sort_by_key(|b| b.indices().next());
        let mut block_of = vec![None; universe.space().size()];
        for (k, b) in blocks.iter().enumerate() {
            for i in b.indices() {
                assert!(block_of[i].is_none(), "blocks overlap at point {i}");
                assert!(universe.contains(i), "block leaves the universe at point {i}");
                block_of[i] = Some(k);
            }
        }
        assert!(
            universe.indices().all(|i| block_of[i].is_some()),
            "blocks do not cover the universe"
        );
        DefinableFamily {
            universe,
            blocks,
            block_of,
            convergence: None,
            derivation: None,
        }
    }

    pub fn space(&self) -> &Arc<PointSpace> {
        self.universe.space()
    }

    pub fn universe(&self) -> &PointSet {
        &self.universe
    }

    pub fn blocks(&self) -> &[PointSet] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Number of member sets, `2^blocks`, saturating.
    pub fn len(&self) -> u128 {
        1u128.checked_shl(self.blocks.len() as u32).unwrap_or(u128::MAX)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn convergence(&self) -> Option<Convergence> {
        self.convergence
    }

    pub fn contains(&self, a: &PointSet) -> bool {
        if a.check_same_space(&self.universe).is_err() || !a.is_subset(&self.universe) {
            return false;
        }
        self.blocks.iter().all(|b| {
            let inside = b.intersection(a);
            inside.is_empty() || inside == *b
        })
    }

    /// The least member containing `a`, if `a` lies in the universe.
    pub fn least_superset(&self, a: &PointSet) -> Option<PointSet> {
        if a.check_same_space(&self.universe).is_err() || !a.is_subset(&self.universe) {
            return None;
        }
        let mut out = self.universe.space().empty_set();
        let mut taken = vec![false; self.blocks.len()];
        for i in a.indices() {
            let k = self.block_of[i].expect("inside the universe");
            if !std::mem::replace(&mut taken[k], true) {
                out = out.union(&self.blocks[k]);
            }
        }
        Some(out)
    }

    /// The union of the blocks whose bits are set in `mask`.
    pub fn member(&self, mask: u64) -> PointSet {
        let mut out = self.universe.space().empty_set();
        for (k, b) in self.blocks.iter().enumerate().take(64) {
            if mask >> k & 1 == 1 {
                out = out.union(b);
            }
        }
        out
    }

    /// Every member, ordered by the bit mask over blocks.
    pub fn sets(&self) -> Result<Vec<PointSet>> {
        if self.blocks.len() > 20 {
            return Err(Error::Other(format!(
                "family has 2^{} members, too many to list",
                self.blocks.len()
            )));
        }
        Ok((0..1u64 << self.blocks.len()).map(|m| self.member(m)).collect())
    }

    /// Same universe and the same members.
    pub fn same_sets(&self, other: &DefinableFamily) -> bool {
        self.universe == other.universe && self.blocks == other.blocks
    }

    /// `{ B ∩ A : B a member }`, a Boolean algebra with unit `A ∩ universe`.
    pub fn restrict_to(&self, a: &PointSet) -> Result<DefinableFamily> {
        self.universe.check_same_space(a)?;
        let universe = self.universe.intersection(a);
        let blocks = self.blocks.iter().map(|b| b.intersection(a)).collect();
        Ok(DefinableFamily::from_blocks(universe, blocks))
    }

    /// The extended context the witnesses of [`Self::witness`] are typed over.
    pub fn witness_context(&self) -> Option<&VarContext> {
        self.derivation.as_ref().map(|d| d.y_space.context())
    }

    /// An elementary formula over the extended context whose value is the
    /// cylinder of `a`. Only families built by [`rf_family`] carry
    /// witnesses; `None` also when `a` is not a member or the signature has
    /// no atoms at all over the extended context.
    pub fn witness(&self, a: &PointSet) -> Result<Option<TypedFormula>> {
        let Some(d) = &self.derivation else {
            return Ok(None);
        };
        if !self.contains(a) {
            return Ok(None);
        }
        d.witness(self, a)
    }
}

/// `R_f(X)`.
///
/// Generators are the values of atomic formulas over `Y = X ∪ {budget fresh
/// variables per sort}` with terms up to the configured depth. The partition
/// of `Hom(W(Y), G)` into atomic types is refined until `∃y` of every block
/// is a union of blocks for every `y ∈ Y`; its unions form the closure of the
/// generators under `¬ ∪ ∩ ∃`. An `X`-set belongs to the family when its
/// cylinder over `Y` is such a union.
pub fn rf_family(model: &Model, ctx: &VarContext, cfg: &RfConfig) -> Result<DefinableFamily> {
    let sig = model.signature();
    ctx.check(sig)?;
    let x_space = model.space(ctx)?;
    let budget = cfg.budget.unwrap_or_else(|| model.algebra().max_carrier());
    let mut fresh = FreshNames::new();
    let mut y_ctx = ctx.clone();
    for sort in &sig.sorts {
        for _ in 0..budget {
            let name = fresh.fresh(&y_ctx);
            y_ctx = y_ctx.extended(&name, sort)?;
        }
    }
    let y_space = model.space(&y_ctx)?;
    let n = y_space.size();

    let mut columns: Vec<Vec<(Term, Vec<usize>)>> = Vec::new();
    for terms in enumerate_terms(sig, &y_ctx, cfg.term_depth)? {
        let mut seen = HashSet::new();
        let mut cols = Vec::new();
        for t in terms {
            let col = y_space.term_column(&t)?;
            if seen.insert(col.clone()) {
                cols.push((t, col));
            }
        }
        columns.push(cols);
    }

    // Atomic type of a point: the equality pattern among term values of each
    // sort, plus the truth value of every relation atom.
    let rel_tuples: Vec<Vec<Vec<usize>>> = sig
        .rels
        .iter()
        .map(|r| {
            let sorts: Vec<usize> = r.args.iter().map(|s| sig.sort_index(s).expect("valid")).collect();
            let radices: Vec<usize> = sorts.iter().map(|&s| columns[s].len()).collect();
            let mut tuples = Vec::new();
            crate::algebra::for_each_tuple(&radices, |t| tuples.push(t.to_vec()));
            tuples
        })
        .collect();
    let rel_sorts: Vec<Vec<usize>> = sig
        .rels
        .iter()
        .map(|r| r.args.iter().map(|s| sig.sort_index(s).expect("valid")).collect())
        .collect();
    let mut labels0 = Vec::with_capacity(n);
    {
        let mut ids: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut buf = Vec::new();
        for i in 0..n {
            let mut key: Vec<u32> = Vec::new();
            for cols in &columns {
                let mut first_seen: BTreeMap<usize, u32> = BTreeMap::new();
                for (_, c) in cols {
                    let next = first_seen.len() as u32;
                    key.push(*first_seen.entry(c[i]).or_insert(next));
                }
            }
            for (k, tuples) in rel_tuples.iter().enumerate() {
                for t in tuples {
                    buf.clear();
                    buf.extend(t.iter().zip(&rel_sorts[k]).map(|(&j, &s)| columns[s][j].1[i]));
                    key.push(model.holds(k, &buf) as u32);
                }
            }
            let next = ids.len();
            labels0.push(*ids.entry(key).or_insert(next));
        }
    }

    let mut rounds = vec![labels0];
    loop {
        let cur = rounds.last().expect("at least one round");
        let count = cur.iter().max().map_or(0, |m| m + 1);
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next_labels = Vec::with_capacity(n);
        for i in 0..n {
            let mut key = vec![cur[i]];
            for c in 0..y_space.radices().len() {
                let stride = y_space.strides()[c];
                let base = i - y_space.digit(i, c) * stride;
                let mut fiber: Vec<usize> = (0..y_space.radices()[c]).map(|d| cur[base + d * stride]).collect();
                fiber.sort_unstable();
                fiber.dedup();
                key.push(usize::MAX);
                key.extend(fiber);
            }
            let next = ids.len();
            next_labels.push(*ids.entry(key).or_insert(next));
        }
        if ids.len() == count {
            break;
        }
        rounds.push(next_labels);
    }
    let last = rounds.last().expect("at least one round");
    let y_block_count = last.iter().max().map_or(0, |m| m + 1);

    // Glue X-points whose Y-fibers share a block.
    let x_coords: Vec<usize> = ctx.names().map(|nm| y_space.var_position(nm).expect("X ⊆ Y")).collect();
    let restrict = |i: usize| {
        x_coords
            .iter()
            .zip(x_space.radices())
            .fold(0, |acc, (&c, &r)| acc * r + y_space.digit(i, c))
    };
    let mut x_of_block: Vec<Vec<usize>> = vec![Vec::new(); y_block_count];
    let mut blocks_of_x: Vec<Vec<usize>> = vec![Vec::new(); x_space.size()];
    for (i, &b) in last.iter().enumerate().take(n) {
        let xi = restrict(i);
        if !blocks_of_x[xi].contains(&b) {
            blocks_of_x[xi].push(b);
            x_of_block[b].push(xi);
        }
    }
    let mut class_of_x = vec![usize::MAX; x_space.size()];
    let mut class_of_y_block = vec![usize::MAX; y_block_count];
    let mut classes: Vec<PointSet> = Vec::new();
    for start in 0..x_space.size() {
        if class_of_x[start] != usize::MAX {
            continue;
        }
        let k = classes.len();
        let mut set = x_space.empty_set();
        let mut stack = vec![start];
        class_of_x[start] = k;
        while let Some(xi) = stack.pop() {
            set.insert(xi);
            for &b in &blocks_of_x[xi] {
                if class_of_y_block[b] == usize::MAX {
                    class_of_y_block[b] = k;
                    for &xj in &x_of_block[b] {
                        if class_of_x[xj] == usize::MAX {
                            class_of_x[xj] = k;
                            stack.push(xj);
                        }
                    }
                }
            }
        }
        classes.push(set);
    }

    let orbit_count = orbits(&aut_model(model), &x_space)?.len();
    let mut family = DefinableFamily::from_blocks(x_space.full_set(), classes);
    family.convergence = Some(Convergence {
        block_count: family.block_count(),
        orbit_count,
    });
    family.derivation = Some(Arc::new(Derivation {
        model: model.clone(),
        y_space,
        columns,
        rounds,
        atoms: OnceLock::new(),
    }));
    Ok(family)
}

/// What [`rf_family`] computed, kept for building witnesses on demand.
#[derive(Debug)]
struct Derivation {
    model: Model,
    y_space: Arc<PointSpace>,
    columns: Vec<Vec<(Term, Vec<usize>)>>,
    rounds: Vec<Vec<usize>>,
    atoms: OnceLock<Vec<(Formula, PointSet)>>,
}

/// Greedy cover: literals (true on all of `target`) chosen until they cut
/// `within` down to `target`.
fn greedy_literals(target: &PointSet, within: &PointSet, pool: &[(usize, PointSet)]) -> Vec<(usize, bool)> {
    let mut remaining = within.difference(target);
    let mut chosen = Vec::new();
    while !remaining.is_empty() {
        let mut best: Option<(usize, bool, usize)> = None;
        for (k, (_, v)) in pool.iter().enumerate() {
            let positive = target.is_subset(v);
            let negative = !target.intersects(v);
            let cut = if positive {
                remaining.difference(v).len()
            } else if negative {
                remaining.intersection(v).len()
            } else {
                0
            };
            if cut > 0 && best.is_none_or(|(_, _, c)| cut > c) {
                best = Some((k, positive, cut));
            }
        }
        let Some((k, positive, _)) = best else {
            break;
        };
        let v = &pool[k].1;
        remaining = if positive {
            remaining.intersection(v)
        } else {
            remaining.difference(v)
        };
        chosen.push((k, positive));
    }
    chosen
}

fn conjoin(parts: Vec<Formula>) -> Option<Formula> {
    parts.into_iter().reduce(Formula::and)
}

impl Derivation {
    fn truth(&self) -> Option<Formula> {
        if let Some((name, _)) = self.y_space.context().vars().first() {
            return Some(Formula::eq(Term::var(name), Term::var(name)));
        }
        self.atoms()
            .first()
            .map(|(a, _)| Formula::or(a.clone(), Formula::not(a.clone())))
    }

    fn atoms(&self) -> &[(Formula, PointSet)] {
        self.atoms.get_or_init(|| {
            let sig = self.model.signature();
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            let mut push = |f: Formula, v: PointSet, out: &mut Vec<(Formula, PointSet)>| {
                if !v.is_empty() && !v.is_full() && seen.insert(v.clone()) {
                    out.push((f, v));
                }
            };
            for (k, r) in sig.rels.iter().enumerate() {
                let sorts: Vec<usize> = r.args.iter().map(|s| sig.sort_index(s).expect("valid")).collect();
                let radices: Vec<usize> = sorts.iter().map(|&s| self.columns[s].len()).collect();
                let mut buf = Vec::new();
                crate::algebra::for_each_tuple(&radices, |t| {
                    let terms = t
                        .iter()
                        .zip(&sorts)
                        .map(|(&j, &s)| self.columns[s][j].0.clone())
                        .collect();
                    let v = PointSet::from_predicate(&self.y_space, |i| {
                        buf.clear();
                        buf.extend(t.iter().zip(&sorts).map(|(&j, &s)| self.columns[s][j].1[i]));
                        self.model.holds(k, &buf)
                    });
                    push(Formula::Rel(r.name.clone(), terms), v, &mut out);
                });
            }
            for cols in &self.columns {
                for a in 0..cols.len() {
                    for b in a + 1..cols.len() {
                        let v = PointSet::from_predicate(&self.y_space, |i| cols[a].1[i] == cols[b].1[i]);
                        push(Formula::eq(cols[a].0.clone(), cols[b].0.clone()), v, &mut out);
                    }
                }
            }
            out
        })
    }

    fn block_set(&self, round: usize, label: usize) -> PointSet {
        PointSet::from_predicate(&self.y_space, |i| self.rounds[round][i] == label)
    }

    fn block_formula(
        &self,
        round: usize,
        label: usize,
        memo: &mut HashMap<(usize, usize), Formula>,
    ) -> Result<Formula> {
        if let Some(f) = memo.get(&(round, label)) {
            return Ok(f.clone());
        }
        let target = self.block_set(round, label);
        let truth = self
            .truth()
            .ok_or_else(|| Error::Other("no formulas over this context".into()))?;
        let f = if round == 0 {
            let atoms = self.atoms();
            let pool: Vec<(usize, PointSet)> = atoms.iter().enumerate().map(|(k, (_, v))| (k, v.clone())).collect();
            let lits = greedy_literals(&target, &self.y_space.full_set(), &pool)
                .into_iter()
                .map(|(k, pos)| {
                    let a = atoms[pool[k].0].0.clone();
                    if pos {
                        a
                    } else {
                        Formula::not(a)
                    }
                })
                .collect();
            conjoin(lits).unwrap_or(truth)
        } else {
            let first = target.indices().next().expect("blocks are nonempty");
            let parent = self.rounds[round - 1][first];
            let parent_set = self.block_set(round - 1, parent);
            let parent_f = self.block_formula(round - 1, parent, memo)?;
            if parent_set == target {
                parent_f
            } else {
                let old_count = self.rounds[round - 1].iter().max().map_or(0, |m| m + 1);
                let names: Vec<String> = self.y_space.context().names().map(str::to_string).collect();
                let mut pool = Vec::new();
                let mut keys = Vec::new();
                for (c, name) in names.iter().enumerate() {
                    for l in 0..old_count {
                        pool.push((pool.len(), exists_quant(&self.block_set(round - 1, l), name)?));
                        keys.push((c, l));
                    }
                }
                let mut parts = vec![parent_f];
                for (k, pos) in greedy_literals(&target, &parent_set, &pool) {
                    let (c, l) = keys[k];
                    let inner = self.block_formula(round - 1, l, memo)?;
                    let lit = Formula::exists(&names[c], inner);
                    parts.push(if pos { lit } else { Formula::not(lit) });
                }
                conjoin(parts).expect("nonempty")
            }
        };
        memo.insert((round, label), f.clone());
        Ok(f)
    }

    fn witness(&self, family: &DefinableFamily, a: &PointSet) -> Result<Option<TypedFormula>> {
        let Some(truth) = self.truth() else {
            return Ok(None);
        };
        let last = self.rounds.len() - 1;
        let mut memo = HashMap::new();
        let mut labels: Vec<usize> = (0..self.y_space.size())
            .filter(|&i| a.contains(self.restrict_to_x(family, i)))
            .map(|i| self.rounds[last][i])
            .collect();
        labels.sort_unstable();
        labels.dedup();
        let mut parts = Vec::new();
        for b in labels {
            parts.push(self.block_formula(last, b, &mut memo)?);
        }
        let body = parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or_else(|| Formula::not(truth));
        TypedFormula::new(self.y_space.context().clone(), body, self.model.signature()).map(Some)
    }

    fn restrict_to_x(&self, family: &DefinableFamily, i: usize) -> usize {
        let x_space = family.space();
        x_space
            .context()
            .names()
            .zip(x_space.radices())
            .fold(0, |acc, (nm, &r)| {
                let c = self.y_space.var_position(nm).expect("X ⊆ Y");
                acc * r + self.y_space.digit(i, c)
            })
    }
}

/// A sub-theory `T0 ⊆ T` with `T0^f = T^f`, kept left to right: a formula
/// stays when it strictly shrinks the running intersection.
pub fn noetherian_reduce(model: &Model, t: &Theory) -> Result<Theory> {
    let space = model.space(t.context())?;
    let mut acc = space.full_set();
    let mut kept = Vec::new();
    for u in t.formulas() {
        let next = acc.intersection(&eval_formula(model, u)?.rehome(&space)?);
        if next != acc {
            acc = next;
            kept.push(u.clone());
        }
    }
    Theory::new(t.context().clone(), kept)
}

/// Meet of algebraic sets: `A ∩ B`.
pub fn alv_meet(a: &PointSet, b: &PointSet) -> Result<PointSet> {
    a.check_same_space(b)?;
    Ok(a.intersection(b))
}

/// Join of algebraic sets: the closure of `A ∪ B`, with the inputs closed
/// first.
pub fn alv_join(model: &Model, a: &PointSet, b: &PointSet) -> Result<PointSet> {
    a.check_same_space(b)?;
    let ca = set_closure_with(model, a, None)?.closure;
    let cb = set_closure_with(model, &b.rehome(a.space())?, None)?.closure;
    Ok(set_closure_with(model, &ca.union(&cb), None)?.closure)
}

/// The algebra of regular functions on `A`: restrictions to `A` of the
/// definable sets. A formula lies in `A^f` iff its restriction is the unit.
pub fn regular_functions(model: &Model, a: &PointSet, cfg: &RfConfig) -> Result<DefinableFamily> {
    let fam = rf_family(model, a.context(), cfg)?;
    fam.restrict_to(&a.rehome(fam.space())?)
}

const VAR_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

/// The `i`-th standard variable name: `x, y, z, u, v, w, x6, x7, …`.
pub fn standard_var_name(i: usize) -> String {
    VAR_NAMES.get(i).map_or_else(|| format!("x{i}"), |s| s.to_string())
}

/// Contexts of sizes `0..=bound` over the standard names, one per multiset
/// of sorts, the `i`-th name taking the `i`-th sort in signature order.
pub fn standard_contexts(sig: &Signature, bound: usize) -> Result<Vec<VarContext>> {
    let mut out = Vec::new();
    fn rec(sig: &Signature, size: usize, from: usize, acc: &mut Vec<usize>, out: &mut Vec<VarContext>) -> Result<()> {
        if acc.len() == size {
            let vars = acc
                .iter()
                .enumerate()
                .map(|(i, &s)| (standard_var_name(i), sig.sorts[s].clone()));
            out.push(VarContext::new(vars)?);
            return Ok(());
        }
        for s in from..sig.sorts.len() {
            acc.push(s);
            rec(sig, size, s, acc, out)?;
            acc.pop();
        }
        Ok(())
    }
    for size in 0..=bound {
        rec(sig, size, 0, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

/// Bounds for [`geometric_equiv_bounded`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeoBounds {
    /// Largest context size, starting from the empty context.
    pub context_bound: usize,
    /// Nesting depth of connectives and quantifiers over the atoms.
    pub depth: usize,
    /// Largest theory size.
    pub theory_size: usize,
    /// Depth of the terms inside atoms.
    pub term_depth: usize,
    /// Cap on the distinct formula values kept per context.
    pub max_values: usize,
}

impl Default for GeoBounds {
    fn default() -> Self {
        GeoBounds {
            context_bound: 2,
            depth: 3,
            theory_size: 2,
            term_depth: 2,
            max_values: 1 << 14,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeoWitness {
    pub theory: Theory,
    pub candidate: TypedFormula,
    pub in_first: bool,
    pub in_second: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeoVerdict {
    Disagree(Box<GeoWitness>),
    /// Nothing found within the bounds; this is not a proof of equivalence.
    NoDisagreementUpToBounds,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeoReport {
    pub verdict: GeoVerdict,
    pub contexts_checked: usize,
    pub values_checked: usize,
    pub theories_checked: usize,
}

/// Joint values `(Val_f1(u), Val_f2(u))` of the formulas over `ctx` up to the
/// depth bound, deduplicated, each with the first formula producing it.
fn joint_values(
    m1: &Model,
    m2: &Model,
    ctx: &VarContext,
    bounds: &GeoBounds,
) -> Result<Vec<(Formula, PointSet, PointSet)>> {
    let sig = m1.signature();
    let s1 = m1.space(ctx)?;
    let s2 = m2.space(ctx)?;
    let terms = enumerate_terms(sig, ctx, bounds.term_depth)?;
    let mut atoms = Vec::new();
    for r in &sig.rels {
        let sorts: Vec<usize> = r.args.iter().map(|s| sig.sort_index(s).expect("valid")).collect();
        let radices: Vec<usize> = sorts.iter().map(|&s| terms[s].len()).collect();
        crate::algebra::for_each_tuple(&radices, |t| {
            atoms.push(Formula::Rel(
                r.name.clone(),
                t.iter().zip(&sorts).map(|(&j, &s)| terms[s][j].clone()).collect(),
            ));
        });
    }
    for ts in &terms {
        for a in 0..ts.len() {
            for b in a..ts.len() {
                atoms.push(Formula::eq(ts[a].clone(), ts[b].clone()));
            }
        }
    }

    let mut values: Vec<(Formula, PointSet, PointSet)> = Vec::new();
    let mut seen: HashSet<(PointSet, PointSet)> = HashSet::new();
    let mut add = |f: Formula, v1: PointSet, v2: PointSet, values: &mut Vec<_>| -> Result<()> {
        if seen.insert((v1.clone(), v2.clone())) {
            if values.len() >= bounds.max_values {
                return Err(Error::Other(format!(
                    "bound overflow: more than {} formula values over {{{ctx}}}",
                    bounds.max_values
                )));
            }
            values.push((f, v1, v2));
        }
        Ok(())
    };
    for f in atoms {
        let u = TypedFormula::new(ctx.clone(), f, sig)?;
        let v1 = eval_formula(m1, &u)?.rehome(&s1)?;
        let v2 = eval_formula(m2, &u)?.rehome(&s2)?;
        add(u.body, v1, v2, &mut values)?;
    }
    let names: Vec<String> = ctx.names().map(str::to_string).collect();
    let mut layer_start = 0;
    for _ in 0..bounds.depth {
        let n = values.len();
        if layer_start == n {
            break;
        }
        for i in layer_start..n {
            let (f, a1, a2) = values[i].clone();
            add(Formula::not(f.clone()), a1.complement(), a2.complement(), &mut values)?;
            for x in &names {
                add(
                    Formula::exists(x, f.clone()),
                    exists_quant(&a1, x)?,
                    exists_quant(&a2, x)?,
                    &mut values,
                )?;
            }
        }
        for i in 0..n {
            for j in (i + 1).max(layer_start)..n {
                let (fi, a1, a2) = values[i].clone();
                let (fj, b1, b2) = values[j].clone();
                add(
                    Formula::and(fi.clone(), fj.clone()),
                    a1.intersection(&b1),
                    a2.intersection(&b2),
                    &mut values,
                )?;
                add(Formula::or(fi, fj), a1.union(&b1), a2.union(&b2), &mut values)?;
            }
        }
        layer_start = n;
    }
    Ok(values)
}

/// Searches for a theory `T` and a formula `v` with `v ∈ T^{f1 f1}` and
/// `v ∉ T^{f2 f2}` or the reverse, enumerating contexts by size, then
/// theories by size in formula order, then candidates in formula order.
pub fn geometric_equiv_bounded(m1: &Model, m2: &Model, bounds: &GeoBounds) -> Result<GeoReport> {
    if m1.signature() != m2.signature() {
        return Err(Error::SignatureMismatch);
    }
    let sig = m1.signature();
    let mut report = GeoReport {
        verdict: GeoVerdict::NoDisagreementUpToBounds,
        contexts_checked: 0,
        values_checked: 0,
        theories_checked: 0,
    };
    for ctx in standard_contexts(sig, bounds.context_bound)? {
        let values = joint_values(m1, m2, &ctx, bounds)?;
        report.contexts_checked += 1;
        report.values_checked += values.len();
        if values.is_empty() {
            continue;
        }
        let s1 = m1.space(&ctx)?;
        let s2 = m2.space(&ctx)?;
        let mut seen: HashSet<(PointSet, PointSet)> = HashSet::new();
        for size in 1..=bounds.theory_size.min(values.len()) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let mut t1 = s1.full_set();
                let mut t2 = s2.full_set();
                for &i in &idx {
                    t1 = t1.intersection(&values[i].1);
                    t2 = t2.intersection(&values[i].2);
                }
                if seen.insert((t1.clone(), t2.clone())) {
                    report.theories_checked += 1;
                    for (f, v1, v2) in &values {
                        let in_first = t1.is_subset(v1);
                        let in_second = t2.is_subset(v2);
                        if in_first != in_second {
                            let formulas = idx
                                .iter()
                                .map(|&i| TypedFormula::new(ctx.clone(), values[i].0.clone(), sig))
                                .collect::<Result<Vec<_>>>()?;
                            report.verdict = GeoVerdict::Disagree(Box::new(GeoWitness {
                                theory: Theory::new(ctx.clone(), formulas)?,
                                candidate: TypedFormula::new(ctx.clone(), f.clone(), sig)?,
                                in_first,
                                in_second,
                            }));
                            return Ok(report);
                        }
                    }
                }
                if !next_combination(&mut idx, values.len()) {
                    break;
                }
            }
        }
    }
    Ok(report)
}

/// Advances `idx` to the next increasing `k`-subset of `0..n`.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
