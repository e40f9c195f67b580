//! Multi-sorted signatures and finite algebras.
//!
//! A [`Signature`] names the sorts, the operation symbols with their types
//! `(i1 … in; j)` and the relation symbols with their types `(i1 … in)`.
//! The class of algebras under consideration is the class of *all* algebras
//! of the signature, so the free algebra `W(X)` over a variable context is the
//! plain term algebra (see [`Term`]).
//!
//! Carrier elements are dense integers `0..n`, which lets point spaces use a
//! mixed-radix index.

mod iso;
mod term;

pub use iso::{aut_group, find_isomorphisms, AlgebraMap, Group};
pub use term::{
    apply_subst_term, compose_subst, enumerate_terms, eval_term, Assignment, Substitution, Term, VarContext,
};

use std::collections::HashSet;

use crate::error::{Error, Result, Violation};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpDecl {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelDecl {
    pub name: String,
    pub args: Vec<String>,
}

/// Sorts, operation symbols and relation symbols, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    pub sorts: Vec<String>,
    pub ops: Vec<OpDecl>,
    pub rels: Vec<RelDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sort(mut self, name: &str) -> Self {
        self.sorts.push(name.to_string());
        self
    }

    pub fn with_op(mut self, name: &str, args: &[&str], result: &str) -> Self {
        self.ops.push(OpDecl {
            name: name.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            result: result.to_string(),
        });
        self
    }

    pub fn with_rel(mut self, name: &str, args: &[&str]) -> Self {
        self.rels.push(RelDecl {
            name: name.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts.iter().position(|s| s == name)
    }

    pub fn op(&self, name: &str) -> Option<(usize, &OpDecl)> {
        self.ops.iter().enumerate().find(|(_, o)| o.name == name)
    }

    pub fn rel(&self, name: &str) -> Option<(usize, &RelDecl)> {
        self.rels.iter().enumerate().find(|(_, r)| r.name == name)
    }

    pub(crate) fn require_sort(&self, name: &str) -> Result<usize> {
        self.sort_index(name).ok_or_else(|| Error::UnknownSymbol {
            kind: "sort",
            name: name.to_string(),
        })
    }

    /// True when both signatures agree on sorts and operations. Relation
    /// symbols are ignored: they belong to models, not to algebras.
    pub fn same_algebra_part(&self, other: &Signature) -> bool {
        self.sorts == other.sorts && self.ops == other.ops
    }

    /// Copy of this signature with a different relation vocabulary.
    pub fn with_relations(&self, rels: Vec<RelDecl>) -> Signature {
        Signature {
            sorts: self.sorts.clone(),
            ops: self.ops.clone(),
            rels,
        }
    }
}

/// Lists every violated signature invariant. An empty report means the
/// signature is valid.
pub fn validate_signature(sig: &Signature) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for s in &sig.sorts {
        if !seen.insert(s.as_str()) {
            out.push(Violation::new(format!("sort {s}"), format!("duplicate name {s}")));
        }
    }
    let known: HashSet<&str> = sig.sorts.iter().map(String::as_str).collect();
    let check_sort = |out: &mut Vec<Violation>, loc: &str, s: &str| {
        if !known.contains(s) {
            out.push(Violation::new(loc, format!("unknown sort {s}")));
        }
    };

    let mut seen = HashSet::new();
    for op in &sig.ops {
        let loc = format!("op {}", op.name);
        if !seen.insert(op.name.as_str()) {
            out.push(Violation::new(&loc, format!("duplicate name {}", op.name)));
        }
        for a in &op.args {
            check_sort(&mut out, &loc, a);
        }
        check_sort(&mut out, &loc, &op.result);
    }

    let mut seen = HashSet::new();
    for rel in &sig.rels {
        let loc = format!("rel {}", rel.name);
        if !seen.insert(rel.name.as_str()) {
            out.push(Violation::new(&loc, format!("duplicate name {}", rel.name)));
        }
        if rel.args.is_empty() {
            out.push(Violation::new(&loc, "relation arity must be at least 1"));
        }
        for a in &rel.args {
            check_sort(&mut out, &loc, a);
        }
    }
    out
}

/// A finite algebra `G = (G_i, i ∈ Γ)` with total operation tables.
///
/// `tables[k]` holds the results of `ops[k]` for every argument tuple, in
/// row-major order with the first argument most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    pub signature: Signature,
    pub carriers: Vec<usize>,
    pub tables: Vec<Vec<usize>>,
}

impl FiniteAlgebra {
    /// Builds and validates an algebra.
    pub fn new(signature: Signature, carriers: Vec<usize>, tables: Vec<Vec<usize>>) -> Result<Self> {
        let alg = FiniteAlgebra {
            signature,
            carriers,
            tables,
        };
        let mut report = validate_signature(&alg.signature);
        if report.is_empty() {
            report = validate_algebra(&alg);
        }
        if report.is_empty() {
            Ok(alg)
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// Builds an algebra by tabulating `f(op_index, args)` over every tuple.
    pub fn from_fn(
        signature: Signature,
        carriers: Vec<usize>,
        mut f: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(signature.ops.len());
        for (k, op) in signature.ops.iter().enumerate() {
            let radices = op
                .args
                .iter()
                .map(|a| signature.require_sort(a).map(|i| carriers.get(i).copied().unwrap_or(0)))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Vec::new();
            for_each_tuple(&radices, |args| table.push(f(k, args)));
            tables.push(table);
        }
        Self::new(signature, carriers, tables)
    }

    pub fn carrier(&self, sort: usize) -> usize {
        self.carriers[sort]
    }

    pub fn carrier_of(&self, sort: &str) -> Result<usize> {
        Ok(self.carriers[self.signature.require_sort(sort)?])
    }

    pub fn max_carrier(&self) -> usize {
        self.carriers.iter().copied().max().unwrap_or(0)
    }

    pub(crate) fn arg_sorts(&self, op: usize) -> Vec<usize> {
        self.signature.ops[op]
            .args
            .iter()
            .map(|a| self.signature.sort_index(a).expect("validated signature"))
            .collect()
    }

    pub(crate) fn result_sort(&self, op: usize) -> usize {
        self.signature
            .sort_index(&self.signature.ops[op].result)
            .expect("validated signature")
    }

    /// Applies operation `op` to `args` by table lookup.
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let decl = &self.signature.ops[op];
        let mut idx = 0;
        for (a, s) in args.iter().zip(&decl.args) {
            let n = self.carriers[self.signature.sort_index(s).expect("validated signature")];
            idx = idx * n + a;
        }
        self.tables[op][idx]
    }
}

/// Calls `f` on every tuple of the mixed-radix product, first coordinate most
/// significant. An empty radix list yields the single empty tuple.
pub(crate) fn for_each_tuple(radices: &[usize], mut f: impl FnMut(&[usize])) {
    if radices.contains(&0) {
        return;
    }
    let mut tuple = vec![0; radices.len()];
    loop {
        f(&tuple);
        let mut i = radices.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < radices[i] {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// Lists every violated algebra invariant; assumes a valid signature.
pub fn validate_algebra(alg: &FiniteAlgebra) -> Vec<Violation> {
    let sig = &alg.signature;
    let mut out = Vec::new();
    if alg.carriers.len() != sig.sorts.len() {
        out.push(Violation::new(
            "carriers",
            format!("{} carriers for {} sorts", alg.carriers.len(), sig.sorts.len()),
        ));
        return out;
    }
    for (s, &n) in sig.sorts.iter().zip(&alg.carriers) {
        if n == 0 {
            out.push(Violation::new(format!("sort {s}"), "empty carrier"));
        }
    }
    if alg.tables.len() != sig.ops.len() {
        out.push(Violation::new(
            "tables",
            format!("{} tables for {} operations", alg.tables.len(), sig.ops.len()),
        ));
        return out;
    }
    for (op, table) in sig.ops.iter().zip(&alg.tables) {
        let loc = format!("op {}", op.name);
        let (Some(expected), Some(res)) = (
            op.args
                .iter()
                .map(|a| sig.sort_index(a).map(|i| alg.carriers[i]))
                .try_fold(1usize, |acc, n| n.map(|n| acc * n)),
            sig.sort_index(&op.result).map(|i| alg.carriers[i]),
        ) else {
            continue;
        };
        if table.len() != expected {
            out.push(Violation::new(&loc, "table not total"));
        }
        if let Some(bad) = table.iter().find(|&&e| e >= res) {
            out.push(Violation::new(
                &loc,
                format!("element out of range: {bad} for sort {} of size {res}", op.result),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zsig() -> Signature {
        Signature::new()
            .with_sort("s")
            .with_op("add", &["s", "s"], "s")
            .with_rel("p", &["s"])
    }

    #[test]
    fn fixture_signature_is_valid() {
        assert!(validate_signature(&zsig()).is_empty());
    }

    #[test]
    fn undeclared_result_sort() {
        let sig = Signature::new().with_sort("s").with_op("f", &["s"], "t");
        let report = validate_signature(&sig);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].message, "unknown sort t");
    }

    #[test]
    fn duplicate_op_name() {
        let sig = zsig().with_op("add", &["s"], "s");
        let report = validate_signature(&sig);
        assert_eq!(report.len(), 1);
        assert!(report[0].message.starts_with("duplicate name"));
    }

    #[test]
    fn nullary_relation_rejected() {
        let sig = Signature::new().with_sort("s").with_rel("q", &[]);
        assert_eq!(validate_signature(&sig).len(), 1);
    }

    fn z3_table() -> Vec<usize> {
        (0..9).map(|i| (i / 3 + i % 3) % 3).collect()
    }

    #[test]
    fn z3_is_valid() {
        let alg = FiniteAlgebra::new(zsig(), vec![3], vec![z3_table()]).unwrap();
        assert_eq!(alg.apply(0, &[1, 2]), 0);
        assert_eq!(alg.apply(0, &[2, 2]), 1);
    }

    #[test]
    fn missing_table_entry() {
        let mut t = z3_table();
        t.pop();
        let alg = FiniteAlgebra {
            signature: zsig(),
            carriers: vec![3],
            tables: vec![t],
        };
        let report = validate_algebra(&alg);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].message, "table not total");
    }

    #[test]
    fn out_of_range_entry() {
        let mut t = z3_table();
        t[4] = 3;
        let alg = FiniteAlgebra {
            signature: zsig(),
            carriers: vec![3],
            tables: vec![t],
        };
        let report = validate_algebra(&alg);
        assert_eq!(report.len(), 1);
        assert!(report[0].message.starts_with("element out of range"));
    }

    #[test]
    fn empty_carrier_rejected() {
        assert!(FiniteAlgebra::new(Signature::new().with_sort("s"), vec![0], vec![]).is_err());
    }

    #[test]
    fn tuple_enumeration_order() {
        let mut seen = Vec::new();
        for_each_tuple(&[2, 3], |t| seen.push(t.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[3], vec![1, 0]);
        let mut n = 0;
        for_each_tuple(&[], |_| n += 1);
        assert_eq!(n, 1);
    }
}
