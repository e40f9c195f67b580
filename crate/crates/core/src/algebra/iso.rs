use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{for_each_tuple, FiniteAlgebra, Signature};

/// A per-sort map between the carriers of two algebras of one signature.
///
/// Maps compare lexicographically by their per-sort tables, which fixes the
/// order in which isomorphisms and group elements are listed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlgebraMap {
    per_sort: Vec<Vec<usize>>,
}

impl AlgebraMap {
    pub fn new(per_sort: Vec<Vec<usize>>) -> Self {
        AlgebraMap { per_sort }
    }

    pub fn identity(alg: &FiniteAlgebra) -> Self {
        AlgebraMap {
            per_sort: alg.carriers.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    pub fn per_sort(&self) -> &[Vec<usize>] {
        &self.per_sort
    }

    pub fn apply(&self, sort: usize, element: usize) -> usize {
        self.per_sort[sort][element]
    }

    pub fn is_identity(&self) -> bool {
        self.per_sort.iter().all(|m| m.iter().enumerate().all(|(i, &j)| i == j))
    }

    pub fn is_bijective(&self) -> bool {
        self.per_sort.iter().all(|m| {
            let mut seen = vec![false; m.len()];
            m.iter().all(|&j| j < m.len() && !std::mem::replace(&mut seen[j], true))
        })
    }

    /// Checks the homomorphism law against every operation table.
    pub fn is_homomorphism(&self, source: &FiniteAlgebra, target: &FiniteAlgebra) -> bool {
        if !source.signature.same_algebra_part(&target.signature)
            || self.per_sort.len() != source.carriers.len()
            || self.per_sort.iter().zip(&source.carriers).any(|(m, &n)| m.len() != n)
        {
            return false;
        }
        for (k, _) in source.signature.ops.iter().enumerate() {
            let arg_sorts = source.arg_sorts(k);
            let res = source.result_sort(k);
            let radices: Vec<usize> = arg_sorts.iter().map(|&s| source.carriers[s]).collect();
            let mut ok = true;
            for_each_tuple(&radices, |args| {
                if !ok {
                    return;
                }
                let image: Vec<usize> = args
                    .iter()
                    .zip(&arg_sorts)
                    .map(|(&a, &s)| self.per_sort[s][a])
                    .collect();
                ok = self.per_sort[res][source.apply(k, args)] == target.apply(k, &image);
            });
            if !ok {
                return false;
            }
        }
        true
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &AlgebraMap) -> AlgebraMap {
        AlgebraMap {
            per_sort: first
                .per_sort
                .iter()
                .zip(&self.per_sort)
                .map(|(f, g)| f.iter().map(|&e| g[e]).collect())
                .collect(),
        }
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> AlgebraMap {
        AlgebraMap {
            per_sort: self
                .per_sort
                .iter()
                .map(|m| {
                    let mut inv = vec![0; m.len()];
                    for (i, &j) in m.iter().enumerate() {
                        inv[j] = i;
                    }
                    inv
                })
                .collect(),
        }
    }

    /// Per-sort cycle notation, e.g. `s: (1 2)`; fixed points are omitted
    /// and the identity on a sort prints as `()`.
    pub fn cycle_notation(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for (s, m) in self.per_sort.iter().enumerate() {
            if s > 0 {
                out.push_str("; ");
            }
            let name = sig.sorts.get(s).map(String::as_str).unwrap_or("?");
            let _ = write!(out, "{name}: ");
            let mut seen = vec![false; m.len()];
            let mut any = false;
            for start in 0..m.len() {
                if seen[start] || m[start] == start {
                    continue;
                }
                any = true;
                out.push('(');
                let mut cur = start;
                let mut first = true;
                while !seen[cur] {
                    seen[cur] = true;
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    let _ = write!(out, "{cur}");
                    cur = m[cur];
                }
                out.push(')');
            }
            if !any {
                out.push_str("()");
            }
        }
        out
    }
}

/// All isomorphisms `a → b`, in lexicographic order of their per-sort tables.
///
/// Plain backtracking: elements are assigned in (sort, element) order and
/// every table entry is checked as soon as all elements it mentions have
/// images.
pub fn find_isomorphisms(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Vec<AlgebraMap> {
    if !a.signature.same_algebra_part(&b.signature) || a.carriers != b.carriers {
        return Vec::new();
    }
    let offsets: Vec<usize> = a
        .carriers
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let total: usize = a.carriers.iter().sum();
    let slot = |sort: usize, e: usize| offsets[sort] + e;

    // Each constraint: (op, argument elements, result element); checked at the
    // step that assigns the latest slot it mentions.
    struct Entry {
        op: usize,
        args: Vec<(usize, usize)>,
        result: (usize, usize),
    }
    let mut due: Vec<Vec<Entry>> = (0..total).map(|_| Vec::new()).collect();
    for k in 0..a.signature.ops.len() {
        let arg_sorts = a.arg_sorts(k);
        let res = a.result_sort(k);
        let radices: Vec<usize> = arg_sorts.iter().map(|&s| a.carriers[s]).collect();
        for_each_tuple(&radices, |args| {
            let args: Vec<(usize, usize)> = arg_sorts.iter().copied().zip(args.iter().copied()).collect();
            let plain: Vec<usize> = args.iter().map(|&(_, e)| e).collect();
            let result = (res, a.apply(k, &plain));
            let last = args
                .iter()
                .chain(std::iter::once(&result))
                .map(|&(s, e)| slot(s, e))
                .max()
                .expect("at least the result slot");
            due[last].push(Entry { op: k, args, result });
        });
    }

    let mut order = Vec::with_capacity(total);
    for (s, &n) in a.carriers.iter().enumerate() {
        for e in 0..n {
            order.push((s, e));
        }
    }

    let mut image: Vec<Vec<usize>> = a.carriers.iter().map(|&n| vec![usize::MAX; n]).collect();
    let mut used: Vec<Vec<bool>> = b.carriers.iter().map(|&n| vec![false; n]).collect();
    let mut out = Vec::new();

    fn consistent(entries: &[Entry], image: &[Vec<usize>], b: &FiniteAlgebra) -> bool {
        entries.iter().all(|en| {
            let args: Vec<usize> = en.args.iter().map(|&(s, e)| image[s][e]).collect();
            image[en.result.0][en.result.1] == b.apply(en.op, &args)
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        step: usize,
        order: &[(usize, usize)],
        due: &[Vec<Entry>],
        image: &mut Vec<Vec<usize>>,
        used: &mut Vec<Vec<bool>>,
        b: &FiniteAlgebra,
        out: &mut Vec<AlgebraMap>,
    ) {
        if step == order.len() {
            out.push(AlgebraMap::new(image.clone()));
            return;
        }
        let (s, e) = order[step];
        for cand in 0..b.carriers[s] {
            if used[s][cand] {
                continue;
            }
            used[s][cand] = true;
            image[s][e] = cand;
            if consistent(&due[step], image, b) {
                search(step + 1, order, due, image, used, b, out);
            }
            image[s][e] = usize::MAX;
            used[s][cand] = false;
        }
    }

    // `due` is indexed by slot, and slots follow `order`, so step == slot.
    debug_assert!(order.iter().enumerate().all(|(i, &(s, e))| slot(s, e) == i));
    search(0, &order, &due, &mut image, &mut used, b, &mut out);
    out
}

/// A finite group of automorphisms, stored as an explicit sorted element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Group {
    elements: Vec<AlgebraMap>,
}

impl Group {
    /// Sorts and deduplicates; does not check the group axioms.
    pub fn from_elements(elements: impl IntoIterator<Item = AlgebraMap>) -> Self {
        let set: BTreeSet<AlgebraMap> = elements.into_iter().collect();
        Group {
            elements: set.into_iter().collect(),
        }
    }

    pub fn trivial(alg: &FiniteAlgebra) -> Self {
        Group {
            elements: vec![AlgebraMap::identity(alg)],
        }
    }

    /// Closure of `generators` (plus the identity) under composition.
    pub fn generated(alg: &FiniteAlgebra, generators: &[AlgebraMap]) -> Self {
        let mut set: BTreeSet<AlgebraMap> = BTreeSet::new();
        set.insert(AlgebraMap::identity(alg));
        let mut frontier: Vec<AlgebraMap> = set.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for g in generators {
                let y = g.after(&x);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        Group {
            elements: set.into_iter().collect(),
        }
    }

    pub fn elements(&self) -> &[AlgebraMap] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: &AlgebraMap) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Group) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }

    /// `{ δ h δ⁻¹ : h ∈ self }` for an isomorphism `δ`.
    pub fn conjugate_by(&self, delta: &AlgebraMap) -> Group {
        let inv = delta.inverse();
        Group::from_elements(self.elements.iter().map(|h| delta.after(&h.after(&inv))))
    }

    /// Identity present, closed under composition and inverses.
    pub fn satisfies_group_axioms(&self) -> bool {
        let Some(first) = self.elements.first() else {
            return false;
        };
        first.is_identity()
            && self
                .elements
                .iter()
                .all(|g| self.contains(&g.inverse()) && self.elements.iter().all(|h| self.contains(&g.after(h))))
    }

    /// Every subgroup, listed by increasing order and then lexicographically.
    pub fn subgroups(&self, alg: &FiniteAlgebra) -> Vec<Group> {
        let mut found: BTreeSet<Vec<AlgebraMap>> = BTreeSet::new();
        let mut frontier = vec![Group::trivial(alg)];
        found.insert(frontier[0].elements.clone());
        while let Some(h) = frontier.pop() {
            for g in &self.elements {
                if h.contains(g) {
                    continue;
                }
                let mut gens = h.elements.clone();
                gens.push(g.clone());
                let bigger = Group::generated(alg, &gens);
                if found.insert(bigger.elements.clone()) {
                    frontier.push(bigger);
                }
            }
        }
        let mut all: Vec<Group> = found.into_iter().map(|elements| Group { elements }).collect();
        all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.elements.cmp(&b.elements)));
        all
    }
}

/// `Aut(G)`.
pub fn aut_group(a: &FiniteAlgebra) -> Group {
    Group::from_elements(find_isomorphisms(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new().with_sort("s").with_op("add", &["s", "s"], "s")
    }

    fn zn(n: usize) -> FiniteAlgebra {
        FiniteAlgebra::from_fn(sig(), vec![n], |_, a| (a[0] + a[1]) % n).unwrap()
    }

    /// All bijections of 0..n checked against the table by brute force.
    fn brute_force_isos(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Vec<AlgebraMap> {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..n {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let mut out: Vec<AlgebraMap> = perms(a.carriers[0])
            .into_iter()
            .map(|p| AlgebraMap::new(vec![p]))
            .filter(|m| m.is_homomorphism(a, b))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn z3_automorphisms() {
        let z3 = zn(3);
        let isos = find_isomorphisms(&z3, &z3);
        assert_eq!(isos, brute_force_isos(&z3, &z3));
        assert_eq!(
            isos,
            vec![
                AlgebraMap::new(vec![vec![0, 1, 2]]),
                AlgebraMap::new(vec![vec![0, 2, 1]])
            ]
        );
    }

    #[test]
    fn z2_and_mismatch() {
        let z2 = zn(2);
        assert_eq!(find_isomorphisms(&z2, &z2), vec![AlgebraMap::identity(&z2)]);
        assert!(find_isomorphisms(&zn(3), &z2).is_empty());
    }

    #[test]
    fn larger_cyclic_groups_match_brute_force() {
        for n in 1..=6 {
            let z = zn(n);
            assert_eq!(find_isomorphisms(&z, &z), brute_force_isos(&z, &z), "Z{n}");
        }
    }

    #[test]
    fn one_element_algebra() {
        let one = zn(1);
        assert_eq!(aut_group(&one).order(), 1);
    }

    #[test]
    fn group_axioms_and_subgroups() {
        let z5 = zn(5);
        let aut = aut_group(&z5);
        assert_eq!(aut.order(), 4);
        assert!(aut.satisfies_group_axioms());
        let subs = aut.subgroups(&z5);
        assert_eq!(subs.iter().map(Group::order).collect::<Vec<_>>(), vec![1, 2, 4]);
        assert!(subs.iter().all(Group::satisfies_group_axioms));
    }

    #[test]
    fn cycles() {
        let s = sig();
        assert_eq!(AlgebraMap::new(vec![vec![0, 2, 1]]).cycle_notation(&s), "s: (1 2)");
        assert_eq!(AlgebraMap::new(vec![vec![0, 1, 2]]).cycle_notation(&s), "s: ()");
        assert_eq!(AlgebraMap::new(vec![vec![1, 2, 0, 3]]).cycle_notation(&s), "s: (0 1 2)");
    }

    #[test]
    fn inverse_and_composition() {
        let m = AlgebraMap::new(vec![vec![1, 2, 0]]);
        assert!(m.after(&m.inverse()).is_identity());
        assert_eq!(m.after(&m), AlgebraMap::new(vec![vec![2, 0, 1]]));
    }
}
