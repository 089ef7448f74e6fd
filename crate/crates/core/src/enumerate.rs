//! Constant-delay enumeration and constant-time testing over a tree of
//! tables whose free side forms a connected subtree, plus duplicate-free
//! enumeration of a union of such indexes.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::cq::Cq;
use crate::decomp::{build_join_tree, enumerate_fc_tds, DEFAULT_VAR_CAP};
use crate::error::{Error, Result};
use crate::eval::NormalizedAtom;
use crate::relmodel::{Row, RowSet, Structure, Value};
use crate::varset::{project_row, VarSet};

struct FNode {
    bag: VarSet,
    /// Positions, inside the output row, of `bag ∩ parent bag`.
    key_pos: Vec<usize>,
    /// Positions, inside the output row, of the variables this node sets.
    new_pos: Vec<usize>,
    /// Positions, inside a row of this node, of those variables.
    new_src: Vec<usize>,
    buckets: FxHashMap<Row, Vec<Row>>,
    members: FxHashSet<Row>,
}

/// Preprocessed, semijoin-reduced tables with lookup structures on the
/// free-side nodes.
pub struct EnumIndex {
    free: VarSet,
    nodes: Vec<FNode>,
    nonempty: bool,
}

/// Keeps rows of `keep` whose projection to the shared variables occurs in
/// `by`. Returns whether anything was removed.
fn semijoin(keep_bag: VarSet, keep: &mut RowSet, by_bag: VarSet, by: &RowSet) -> bool {
    let shared = keep_bag.intersection(by_bag);
    let mut buf = Vec::new();
    let keys: FxHashSet<Row> = by
        .iter()
        .map(|r| {
            project_row(by_bag, r, shared, &mut buf);
            buf.clone()
        })
        .collect();
    let before = keep.len();
    keep.retain(|r| {
        project_row(keep_bag, r, shared, &mut buf);
        keys.contains(buf.as_slice())
    });
    keep.len() != before
}

impl EnumIndex {
    /// Builds the index from a tree (given by `edges` over `bags`) with one
    /// table per node, and the free-side nodes `f_nodes`, which must form a
    /// connected subtree whose bags cover exactly `free`.
    pub fn from_tree(
        free: VarSet,
        bags: &[VarSet],
        edges: &[(usize, usize)],
        f_nodes: &[usize],
        tables: Vec<RowSet>,
    ) -> Result<Self> {
        let n = bags.len();
        if n == 0 || tables.len() != n || edges.len() + 1 != n {
            return Err(Error::InvalidTd("tree and tables do not match".into()));
        }
        let cover = f_nodes.iter().fold(VarSet::EMPTY, |acc, &t| acc.union(bags[t]));
        if cover != free {
            return Err(Error::NotFreeConnex);
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let root = f_nodes.first().copied().unwrap_or(0);
        let mut order = vec![root];
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let t = order[i];
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(t);
                    order.push(u);
                }
            }
            i += 1;
        }
        if order.len() != n {
            return Err(Error::InvalidTd("edges do not form a tree".into()));
        }
        let in_f: FxHashSet<usize> = f_nodes.iter().copied().collect();
        for &t in f_nodes {
            if t != root && !parent[t].is_some_and(|p| in_f.contains(&p)) {
                return Err(Error::NotFreeConnex);
            }
        }

        let mut tables = tables;
        for &t in order.iter().rev() {
            if let Some(p) = parent[t] {
                let child = std::mem::take(&mut tables[t]);
                semijoin(bags[p], &mut tables[p], bags[t], &child);
                tables[t] = child;
            }
        }
        for &t in &order {
            if let Some(p) = parent[t] {
                let up = std::mem::take(&mut tables[p]);
                semijoin(bags[t], &mut tables[t], bags[p], &up);
                tables[p] = up;
            }
        }
        let nonempty = tables.iter().all(|t| !t.is_empty());

        let mut nodes = Vec::new();
        let mut placed = VarSet::EMPTY;
        for &t in order.iter().filter(|t| in_f.contains(t)) {
            let bag = bags[t];
            let key = match parent[t] {
                Some(p) => bag.intersection(bags[p]),
                None => VarSet::EMPTY,
            };
            let new = bag.difference(placed);
            debug_assert_eq!(bag.difference(new), key);
            let mut buckets: FxHashMap<Row, Vec<Row>> = FxHashMap::default();
            let mut buf = Vec::new();
            let table = std::mem::take(&mut tables[t]);
            for row in &table {
                project_row(bag, row, key, &mut buf);
                buckets.entry(buf.clone()).or_default().push(row.clone());
            }
            nodes.push(FNode {
                bag,
                key_pos: free.positions_of(key),
                new_pos: free.positions_of(new),
                new_src: bag.positions_of(new),
                buckets,
                members: table.into_iter().collect(),
            });
            placed = placed.union(bag);
        }
        Ok(EnumIndex {
            free,
            nodes,
            nonempty,
        })
    }

    pub fn free(&self) -> VarSet {
        self.free
    }

    pub fn is_empty(&self) -> bool {
        !self.nonempty
    }

    pub fn enumerate(&self) -> Enumerator<'_> {
        Enumerator {
            idx: self,
            pos: vec![0; self.nodes.len()],
            current: vec![None; self.nodes.len()],
            row: vec![0; self.free.len()],
            started: false,
            done: !self.nonempty,
            steps: 0,
        }
    }

    /// Whether `b` (a row over the free variables) is an answer.
    pub fn test(&self, b: &[Value]) -> Result<bool> {
        let mut steps = 0;
        self.test_counted(b, &mut steps)
    }

    pub fn test_counted(&self, b: &[Value], steps: &mut u64) -> Result<bool> {
        if b.len() != self.free.len() {
            return Err(Error::DomainMismatch);
        }
        if !self.nonempty {
            *steps += 1;
            return Ok(false);
        }
        let mut buf = Vec::new();
        for node in &self.nodes {
            *steps += 1;
            project_row(self.free, b, node.bag, &mut buf);
            if !node.members.contains(buf.as_slice()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Odometer over the free-side nodes in preorder: each node walks the
/// bucket selected by its parent's current row.
pub struct Enumerator<'a> {
    idx: &'a EnumIndex,
    pos: Vec<usize>,
    current: Vec<Option<&'a [Row]>>,
    row: Vec<Value>,
    started: bool,
    done: bool,
    steps: u64,
}

impl<'a> Enumerator<'a> {
    /// Elementary steps taken so far (bucket lookups and cursor moves).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn place(&mut self, i: usize) {
        let node = &self.idx.nodes[i];
        let r = &self.current[i].unwrap()[self.pos[i]];
        for (&dst, &src) in node.new_pos.iter().zip(&node.new_src) {
            self.row[dst] = r[src];
        }
        self.steps += 1;
    }

    /// Resets nodes `from..` to the first row of their buckets.
    fn descend(&mut self, from: usize) {
        let mut key = Vec::new();
        for i in from..self.idx.nodes.len() {
            let node = &self.idx.nodes[i];
            key.clear();
            key.extend(node.key_pos.iter().map(|&p| self.row[p]));
            let bucket = node
                .buckets
                .get(key.as_slice())
                .expect("reduced tables extend every parent row");
            self.current[i] = Some(bucket.as_slice());
            self.pos[i] = 0;
            self.steps += 1;
            self.place(i);
        }
    }
}

impl Iterator for Enumerator<'_> {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        if self.done {
            return None;
        }
        let n = self.idx.nodes.len();
        if !self.started {
            self.started = true;
            self.descend(0);
            return Some(self.row.clone());
        }
        let mut i = n;
        while i > 0 {
            i -= 1;
            self.steps += 1;
            if self.pos[i] + 1 < self.current[i].unwrap().len() {
                self.pos[i] += 1;
                self.place(i);
                self.descend(i + 1);
                return Some(self.row.clone());
            }
        }
        self.done = true;
        None
    }
}

/// Duplicate-free enumeration of the union of several indexes over the same
/// free variables. Level `j` walks the union of levels `< j`; an item that
/// level `j`'s index also contains is replaced by the next item of that
/// index, and once the lower levels run dry the same cursor continues.
pub struct UnionEnumerator<'a> {
    idxs: &'a [EnumIndex],
    cursors: Vec<Enumerator<'a>>,
    drained: Vec<bool>,
    test_steps: u64,
}

pub fn union_enumerate(idxs: &[EnumIndex]) -> Result<UnionEnumerator<'_>> {
    if let Some(first) = idxs.first() {
        if idxs.iter().any(|i| i.free != first.free) {
            return Err(Error::SchemaMismatch);
        }
    }
    Ok(UnionEnumerator {
        idxs,
        cursors: idxs.iter().map(|i| i.enumerate()).collect(),
        drained: vec![false; idxs.len()],
        test_steps: 0,
    })
}

impl UnionEnumerator<'_> {
    pub fn steps(&self) -> u64 {
        self.test_steps + self.cursors.iter().map(|c| c.steps()).sum::<u64>()
    }

    fn next_at(&mut self, j: usize) -> Option<Row> {
        self.test_steps += 1;
        if j == 0 || self.drained[j] {
            return self.cursors[j].next();
        }
        match self.next_at(j - 1) {
            Some(x) => {
                let hit = self.idxs[j]
                    .test_counted(&x, &mut self.test_steps)
                    .expect("schemas checked on construction");
                if hit {
                    let sub = self.cursors[j].next();
                    debug_assert!(sub.is_some(), "more substitutions than items");
                    sub
                } else {
                    Some(x)
                }
            }
            None => {
                self.drained[j] = true;
                self.cursors[j].next()
            }
        }
    }
}

impl Iterator for UnionEnumerator<'_> {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        if self.idxs.is_empty() {
            return None;
        }
        self.next_at(self.idxs.len() - 1)
    }
}

/// Index for a free-connex acyclic query: a free-connex decomposition whose
/// bags each lie inside some atom, with each node's table taken from such an
/// atom and filtered by the atoms placed at that node.
pub fn preprocess_acyclic(psi: &Cq, c: &Structure) -> Result<EnumIndex> {
    build_join_tree(psi)?;
    psi.check_signature(c.signature())?;
    let atoms: Vec<NormalizedAtom> = NormalizedAtom::all(psi, c);
    let tds = enumerate_fc_tds(psi, DEFAULT_VAR_CAP)?;
    let covered = |bag: VarSet| atoms.iter().position(|a| bag.is_subset(a.vars));
    let td = tds
        .into_iter()
        .find(|td| td.bags.iter().all(|&b| covered(b).is_some()))
        .ok_or(Error::NotFreeConnex)?;
    let mut placed = vec![Vec::new(); td.len()];
    for (i, a) in atoms.iter().enumerate() {
        let t = (0..td.len()).find(|&t| a.vars.is_subset(td.bags[t])).unwrap();
        placed[t].push(i);
    }
    let mut buf = Vec::new();
    let tables: Vec<RowSet> = td
        .bags
        .iter()
        .enumerate()
        .map(|(t, &bag)| {
            let cover = &atoms[covered(bag).unwrap()];
            let mut rows = RowSet::default();
            for r in cover.rows.iter() {
                project_row(cover.vars, r, bag, &mut buf);
                if !rows.contains(buf.as_slice()) {
                    rows.insert(buf.clone());
                }
            }
            for &i in &placed[t] {
                let a = &atoms[i];
                rows.retain(|r| {
                    project_row(bag, r, a.vars, &mut buf);
                    a.rows.contains(buf.as_slice())
                });
            }
            rows
        })
        .collect();
    let f_nodes = td.connex.clone().unwrap_or_default();
    EnumIndex::from_tree(psi.free(), &td.bags, &td.edges, &f_nodes, tables)
}
