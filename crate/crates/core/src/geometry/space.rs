use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::algebra::{Assignment, FiniteAlgebra, Term, VarContext};
use crate::error::{Error, Result};

/// Default cap on the number of points of a materialized space.
pub const DEFAULT_MAX_POINTS: usize = 1 << 20;

/// The affine space `Hom(W(X), G)`, identified with assignments `X → G`.
///
/// Points are indexed in mixed radix: context variables in ascending name
/// order, the first variable being the most significant digit and the digit
/// being the element value.
#[derive(Debug)]
pub struct PointSpace {
    context: VarContext,
    algebra: Arc<FiniteAlgebra>,
    sorts: Vec<usize>,
    radices: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
    cap: usize,
}

impl PointSpace {
    pub fn new(context: VarContext, algebra: Arc<FiniteAlgebra>) -> Result<Arc<Self>> {
        Self::with_cap(context, algebra, DEFAULT_MAX_POINTS)
    }

    pub fn with_cap(context: VarContext, algebra: Arc<FiniteAlgebra>, cap: usize) -> Result<Arc<Self>> {
        context.check(&algebra.signature)?;
        let sorts: Vec<usize> = context
            .vars()
            .iter()
            .map(|(_, s)| algebra.signature.sort_index(s).expect("checked above"))
            .collect();
        let radices: Vec<usize> = sorts.iter().map(|&s| algebra.carriers[s]).collect();
        let mut size: u128 = 1;
        for &r in &radices {
            size = size.saturating_mul(r as u128);
        }
        if size > cap as u128 {
            return Err(Error::SpaceTooLarge { size, cap });
        }
        let mut strides = vec![1; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1];
        }
        Ok(Arc::new(PointSpace {
            context,
            algebra,
            sorts,
            radices,
            strides,
            size: size as usize,
            cap,
        }))
    }

    pub fn context(&self) -> &VarContext {
        &self.context
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.algebra
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn radices(&self) -> &[usize] {
        &self.radices
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Sort index of each coordinate.
    pub fn sorts(&self) -> &[usize] {
        &self.sorts
    }

    pub fn var_position(&self, name: &str) -> Result<usize> {
        self.context
            .position(name)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }

    /// Same context over an algebra of the same shape.
    pub fn same_shape(&self, other: &PointSpace) -> bool {
        self.context == other.context && self.radices == other.radices
    }

    pub fn digit(&self, index: usize, coordinate: usize) -> usize {
        (index / self.strides[coordinate]) % self.radices[coordinate]
    }

    pub fn point_index(&self, p: &Point) -> Result<usize> {
        if p.values.len() != self.radices.len() {
            return Err(Error::ContextMismatch(format!(
                "point has {} coordinates, space {{{}}} has {}",
                p.values.len(),
                self.context,
                self.radices.len()
            )));
        }
        let mut idx = 0;
        for (i, (&v, &r)) in p.values.iter().zip(&self.radices).enumerate() {
            if v >= r {
                return Err(Error::ElementOutOfRange {
                    sort: self.context.vars()[i].1.clone(),
                    element: v,
                    size: r,
                });
            }
            idx = idx * r + v;
        }
        Ok(idx)
    }

    pub fn index_point(&self, index: usize) -> Point {
        Point {
            values: (0..self.radices.len()).map(|i| self.digit(index, i)).collect(),
        }
    }

    /// Value of `term` at every point, indexed by point.
    pub fn term_column(&self, term: &Term) -> Result<Vec<usize>> {
        match term {
            Term::Var(v) => {
                let i = self.var_position(v)?;
                Ok((0..self.size).map(|idx| self.digit(idx, i)).collect())
            }
            Term::App(op, args) => {
                let (k, decl) = self.algebra.signature.op(op).ok_or_else(|| Error::UnknownSymbol {
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
                let cols = args.iter().map(|a| self.term_column(a)).collect::<Result<Vec<_>>>()?;
                let mut buf = vec![0; cols.len()];
                Ok((0..self.size)
                    .map(|idx| {
                        for (b, c) in buf.iter_mut().zip(&cols) {
                            *b = c[idx];
                        }
                        self.algebra.apply(k, &buf)
                    })
                    .collect())
            }
        }
    }

    pub fn empty_set(self: &Arc<Self>) -> PointSet {
        PointSet {
            space: Arc::clone(self),
            bits: FixedBitSet::with_capacity(self.size),
        }
    }

    pub fn full_set(self: &Arc<Self>) -> PointSet {
        let mut s = self.empty_set();
        s.bits.insert_range(..);
        s
    }
}

/// A point, as its coordinates in context order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub values: Vec<usize>,
}

impl Point {
    pub fn new(values: Vec<usize>) -> Self {
        Point { values }
    }

    pub fn from_assignment(space: &PointSpace, a: &Assignment) -> Result<Self> {
        Ok(Point {
            values: space
                .context
                .names()
                .map(|n| a.get(n).copied().ok_or_else(|| Error::UnboundVariable(n.to_string())))
                .collect::<Result<_>>()?,
        })
    }

    pub fn to_assignment(&self, space: &PointSpace) -> Assignment {
        space
            .context
            .names()
            .map(str::to_string)
            .zip(self.values.iter().copied())
            .collect()
    }

    /// `x=0 y=1`.
    pub fn describe(&self, space: &PointSpace) -> String {
        space
            .context
            .names()
            .zip(&self.values)
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A subset of a point space, stored as a dense bit-vector.
#[derive(Clone, Debug)]
pub struct PointSet {
    space: Arc<PointSpace>,
    bits: FixedBitSet,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space.same_shape(&other.space)) && self.bits == other.bits
    }
}

impl Eq for PointSet {}

impl Hash for PointSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}

impl PointSet {
    pub fn from_indices(space: &Arc<PointSpace>, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = space.empty_set();
        for i in indices {
            if i >= space.size {
                return Err(Error::Other(format!(
                    "point index {i} out of range for a space of {} points",
                    space.size
                )));
            }
            s.bits.insert(i);
        }
        Ok(s)
    }

    pub fn from_predicate(space: &Arc<PointSpace>, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = space.empty_set();
        for i in 0..space.size {
            if f(i) {
                s.bits.insert(i);
            }
        }
        s
    }

    pub fn space(&self) -> &Arc<PointSpace> {
        &self.space
    }

    pub fn context(&self) -> &VarContext {
        &self.space.context
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn insert(&mut self, index: usize) {
        self.bits.insert(index);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.space.size
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn check_same_space(&self, other: &PointSet) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space.same_shape(&other.space) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!(
                "sets over {{{}}} and {{{}}}",
                self.space.context, other.space.context
            )))
        }
    }

    fn assert_same(&self, other: &PointSet) {
        assert!(self.check_same_space(other).is_ok(), "point sets over different spaces");
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        self.assert_same(other);
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        PointSet {
            space: Arc::clone(&self.space),
            bits,
        }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        self.assert_same(other);
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        PointSet {
            space: Arc::clone(&self.space),
            bits,
        }
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        self.assert_same(other);
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        PointSet {
            space: Arc::clone(&self.space),
            bits,
        }
    }

    pub fn complement(&self) -> PointSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        PointSet {
            space: Arc::clone(&self.space),
            bits,
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.assert_same(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &PointSet) -> bool {
        self.assert_same(other);
        !self.bits.is_disjoint(&other.bits)
    }

    /// Same bits re-homed onto an equally shaped space.
    pub fn rehome(&self, space: &Arc<PointSpace>) -> Result<PointSet> {
        if !self.space.same_shape(space) {
            return Err(Error::ContextMismatch(format!(
                "cannot move a set over {{{}}} to {{{}}}",
                self.space.context, space.context
            )));
        }
        Ok(PointSet {
            space: Arc::clone(space),
            bits: self.bits.clone(),
        })
    }
}

/// Ascending indices separated by single spaces.
impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.bits.ones().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}
