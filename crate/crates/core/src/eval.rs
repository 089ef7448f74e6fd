//! Indexed evaluation of projected conjunctions.
//!
//! Every atom, base or refinement, is reduced to a constraint: a set of
//! distinct variables and a set of rows over them. Projecting a constraint
//! to a scope `K` gives the set `π_K(rows)`, built once and cached, so a
//! membership test for a candidate mapping costs one hash lookup per
//! constraint.

use std::cell::RefCell;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::cq::Cq;
use crate::relmodel::{Row, RowSet, Structure, Value};
use crate::varset::{project_row, Var, VarSet};

/// A base atom with repeated variables resolved: rows of the relation that
/// agree on repeated positions, restricted to the first occurrence of each
/// variable and ordered by variable index.
#[derive(Clone, Debug)]
pub struct NormalizedAtom {
    pub vars: VarSet,
    pub rows: Arc<RowSet>,
}

impl NormalizedAtom {
    pub fn new(atom: &crate::cq::Atom, structure: &Structure) -> Self {
        let vars = atom.vars();
        let rel = structure
            .relation(&atom.relation)
            .expect("signature checked by caller");
        // For each variable in index order, the first argument position.
        let firsts: Vec<usize> = vars
            .iter()
            .map(|v| atom.args.iter().position(|&a| a == v).unwrap())
            .collect();
        let repeated = atom.args.len() != vars.len();
        let mut rows = RowSet::default();
        for t in &rel.rows {
            if repeated
                && atom
                    .args
                    .iter()
                    .enumerate()
                    .any(|(p, &v)| t[p] != t[firsts[vars.rank(v)]])
            {
                continue;
            }
            rows.insert(firsts.iter().map(|&p| t[p]).collect());
        }
        NormalizedAtom {
            vars,
            rows: Arc::new(rows),
        }
    }

    pub fn all(phi: &Cq, structure: &Structure) -> Vec<NormalizedAtom> {
        phi.atoms()
            .iter()
            .map(|a| NormalizedAtom::new(a, structure))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum ProjSet {
    Full(Arc<RowSet>),
    Part(Arc<FxHashSet<Row>>),
}

impl ProjSet {
    pub fn contains(&self, key: &[Value]) -> bool {
        match self {
            ProjSet::Full(rows) => rows.contains(key),
            ProjSet::Part(set) => set.contains(key),
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(&Row)) {
        match self {
            ProjSet::Full(rows) => rows.iter().for_each(&mut f),
            ProjSet::Part(set) => set.iter().for_each(&mut f),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ProjSet::Full(rows) => rows.len(),
            ProjSet::Part(set) => set.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Membership test for one scope: the relevant constraints with the
/// positions (inside a row over the scope) of their key columns.
pub struct Checker {
    parts: Vec<(Vec<usize>, ProjSet)>,
    dead: bool,
}

impl Checker {
    pub fn check(&self, row: &[Value], scratch: &mut Vec<Value>) -> bool {
        if self.dead {
            return false;
        }
        self.parts.iter().all(|(pos, set)| {
            scratch.clear();
            scratch.extend(pos.iter().map(|&p| row[p]));
            set.contains(scratch)
        })
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

type CandKey = (usize, VarSet, Var);
/// Candidate values of one variable, keyed by the already bound prefix.
type CandMap = Arc<FxHashMap<Row, Vec<Value>>>;

/// A conjunction of constraints with cached projections.
pub struct Evaluator {
    constraints: Vec<(VarSet, Arc<RowSet>)>,
    proj: RefCell<FxHashMap<(usize, VarSet), ProjSet>>,
    cand: RefCell<FxHashMap<CandKey, CandMap>>,
    empty: usize,
}

impl Evaluator {
    pub fn new(constraints: impl IntoIterator<Item = (VarSet, Arc<RowSet>)>) -> Self {
        let constraints: Vec<_> = constraints.into_iter().collect();
        let empty = constraints.iter().filter(|(_, r)| r.is_empty()).count();
        Evaluator {
            constraints,
            proj: RefCell::default(),
            cand: RefCell::default(),
            empty,
        }
    }

    pub fn push(&mut self, vars: VarSet, rows: Arc<RowSet>) {
        if rows.is_empty() {
            self.empty += 1;
        }
        self.constraints.push((vars, rows));
    }

    /// Some constraint has no rows, so every projection is empty.
    pub fn unsatisfiable(&self) -> bool {
        self.empty > 0
    }

    pub fn constraints(&self) -> &[(VarSet, Arc<RowSet>)] {
        &self.constraints
    }

    pub fn projection(&self, i: usize, key: VarSet) -> ProjSet {
        let (vars, rows) = &self.constraints[i];
        if key == *vars {
            return ProjSet::Full(rows.clone());
        }
        if let Some(p) = self.proj.borrow().get(&(i, key)) {
            return p.clone();
        }
        let mut set = FxHashSet::default();
        let mut buf = Vec::new();
        for r in rows.iter() {
            project_row(*vars, r, key, &mut buf);
            if !set.contains(buf.as_slice()) {
                set.insert(buf.clone());
            }
        }
        let p = ProjSet::Part(Arc::new(set));
        self.proj.borrow_mut().insert((i, key), p.clone());
        p
    }

    /// Checker over `scope` using only constraints whose key `scope ∩ vars`
    /// is non-empty and accepted by `keep`.
    pub fn checker_filtered(&self, scope: VarSet, keep: impl Fn(VarSet) -> bool) -> Checker {
        let mut parts = Vec::new();
        for (i, (vars, _)) in self.constraints.iter().enumerate() {
            let key = vars.intersection(scope);
            if key.is_empty() || !keep(key) {
                continue;
            }
            parts.push((scope.positions_of(key), self.projection(i, key)));
        }
        // Small projections first: they reject more often.
        parts.sort_by_key(|(_, p)| p.len());
        Checker {
            parts,
            dead: self.unsatisfiable(),
        }
    }

    /// Checker over `scope` for explicitly chosen `(constraint, key)` pairs;
    /// every key must lie inside `scope`.
    pub fn checker_keys(&self, scope: VarSet, keys: &[(usize, VarSet)]) -> Checker {
        let mut parts: Vec<_> = keys
            .iter()
            .map(|&(i, key)| (scope.positions_of(key), self.projection(i, key)))
            .collect();
        parts.sort_by_key(|(_, p)| p.len());
        Checker {
            parts,
            dead: self.unsatisfiable(),
        }
    }

    /// `(constraint, key)` for every constraint meeting `scope`.
    pub fn keys_within(&self, scope: VarSet) -> Vec<(usize, VarSet)> {
        self.constraints
            .iter()
            .enumerate()
            .filter_map(|(i, (vars, _))| {
                let key = vars.intersection(scope);
                (!key.is_empty()).then_some((i, key))
            })
            .collect()
    }

    pub fn checker(&self, scope: VarSet) -> Checker {
        self.checker_filtered(scope, |_| true)
    }

    /// Values of `var` among rows of constraint `i` projected to `key`,
    /// grouped by the other key columns.
    fn candidates(&self, i: usize, key: VarSet, var: Var) -> CandMap {
        if let Some(c) = self.cand.borrow().get(&(i, key, var)) {
            return c.clone();
        }
        let rest = key.without(var);
        let pos = key.rank(var);
        let mut map: FxHashMap<Row, Vec<Value>> = FxHashMap::default();
        let mut buf = Vec::new();
        let proj = self.projection(i, key);
        let mut add = |r: &Row| {
            project_row(key, r, rest, &mut buf);
            map.entry(buf.clone()).or_default().push(r[pos]);
        };
        match &proj {
            ProjSet::Full(rows) => rows.iter().for_each(&mut add),
            ProjSet::Part(set) => set.iter().for_each(&mut add),
        }
        let map = Arc::new(map);
        self.cand.borrow_mut().insert((i, key, var), map.clone());
        map
    }

    /// All mappings of `scope` satisfying every constraint projected to it,
    /// by backtracking in variable order with indexed candidate generation.
    pub fn solve(&self, scope: VarSet) -> Vec<Row> {
        if self.unsatisfiable() {
            return Vec::new();
        }
        let order: Vec<Var> = scope.iter().collect();
        let mut levels = Vec::with_capacity(order.len());
        for (depth, &var) in order.iter().enumerate() {
            let done: VarSet = order[..depth].iter().copied().collect();
            let now = done.with(var);
            // Generator: the constraint on `var` sharing most bound variables.
            let mut best: Option<(usize, VarSet)> = None;
            for (i, (vars, _)) in self.constraints.iter().enumerate() {
                if !vars.contains(var) {
                    continue;
                }
                let key = vars.intersection(now);
                if best.is_none_or(|(_, k)| key.len() > k.len()) {
                    best = Some((i, key));
                }
            }
            let Some((gi, gkey)) = best else {
                // A variable outside every constraint has no candidates.
                return Vec::new();
            };
            let key_pos: Vec<usize> = gkey.without(var).iter().map(|v| done.rank(v)).collect();
            levels.push(Level {
                cands: self.candidates(gi, gkey, var),
                key_pos,
                checker: self.checker_filtered(now, |k| k.contains(var)),
            });
        }
        let mut out = Vec::new();
        let mut row = Vec::with_capacity(order.len());
        solve_rec(&levels, &mut row, &mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }
}

struct Level {
    cands: CandMap,
    key_pos: Vec<usize>,
    checker: Checker,
}

fn solve_rec(
    levels: &[Level],
    row: &mut Vec<Value>,
    key: &mut Vec<Value>,
    scratch: &mut Vec<Value>,
    out: &mut Vec<Row>,
) {
    let depth = row.len();
    let Some(level) = levels.get(depth) else {
        out.push(row.clone());
        return;
    };
    key.clear();
    key.extend(level.key_pos.iter().map(|&p| row[p]));
    let Some(values) = level.cands.get(key.as_slice()) else {
        return;
    };
    for &c in values {
        row.push(c);
        if level.checker.check(row, scratch) {
            solve_rec(levels, row, key, scratch, out);
        }
        row.pop();
    }
}
