//! Sets of query variables as bitmasks over variable indexes.

use std::cmp::Ordering;
use std::fmt;

/// Index of a variable inside its query (order of first occurrence).
pub type Var = usize;

/// Most variables a query may carry; bounded by the mask width.
pub const MAX_VARS: usize = 32;

/// A set of variables. Iteration is in increasing index order, which is also
/// the column order of every tuple keyed by this set.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u32) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_VARS);
        if k == 32 {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << k) - 1)
        }
    }

    pub fn singleton(v: Var) -> Self {
        VarSet(1 << v)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: Var) {
        self.0 |= 1 << v;
    }

    pub fn with(self, v: Var) -> Self {
        VarSet(self.0 | 1 << v)
    }

    pub fn without(self, v: Var) -> Self {
        VarSet(self.0 & !(1 << v))
    }

    pub fn union(self, other: Self) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: Self) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn min(self) -> Option<Var> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Var)
    }

    pub fn iter(self) -> VarIter {
        VarIter(self.0)
    }

    /// Position of `v` among the members of `self`.
    pub fn rank(self, v: Var) -> usize {
        (self.0 & ((1u32 << v) - 1)).count_ones() as usize
    }

    /// Column positions, inside a tuple over `self`, of the members of `sub`.
    pub fn positions_of(self, sub: VarSet) -> Vec<usize> {
        debug_assert!(sub.is_subset(self));
        sub.iter().map(|v| self.rank(v)).collect()
    }

    /// All subsets of `self`, smallest bitmask first.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(VarSet(cur))
        })
    }

    /// Total order used wherever a deterministic choice among sets is made:
    /// by cardinality, then lexicographically on the sorted member lists.
    pub fn canonical_cmp(self, other: Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

pub struct VarIter(u32);

impl Iterator for VarIter {
    type Item = Var;

    fn next(&mut self) -> Option<Var> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as Var;
        self.0 &= self.0 - 1;
        Some(v)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Restrict a tuple over `from` to the variables of `to`.
pub fn project_row(from: VarSet, row: &[u32], to: VarSet, out: &mut Vec<u32>) {
    out.clear();
    for v in to.iter() {
        out.push(row[from.rank(v)]);
    }
}

/// Join two tuples over `a` and `b` into one over `a ∪ b`. The caller
/// guarantees they agree on `a ∩ b`.
pub fn merge_rows(a: VarSet, ra: &[u32], b: VarSet, rb: &[u32], out: &mut Vec<u32>) {
    out.clear();
    for v in a.union(b).iter() {
        if a.contains(v) {
            out.push(ra[a.rank(v)]);
        } else {
            out.push(rb[b.rank(v)]);
        }
    }
}
