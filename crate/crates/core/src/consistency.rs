//! Refinements, consistency by Horn propagation, and strongly M-consistent
//! refinements.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use log::debug;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::cq::{is_subset_closed, refine_query, Cq, RefinedQuery};
use crate::error::{Error, Result};
use crate::eval::{Evaluator, NormalizedAtom};
use crate::relmodel::{Row, RowSet, Structure};
use crate::varset::{merge_rows, project_row, VarSet};

/// A family of variable sets with one table of mappings per set, on top of
/// the base structure. Rows of the table for `S` list values in variable
/// index order.
#[derive(Clone)]
pub struct Refinement {
    query: Arc<Cq>,
    structure: Arc<Structure>,
    atoms: Arc<Vec<NormalizedAtom>>,
    tables: BTreeMap<VarSet, Arc<RowSet>>,
}

impl std::fmt::Debug for Refinement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.dump())
    }
}

fn unit_table() -> Arc<RowSet> {
    let mut rows = RowSet::default();
    rows.insert(Vec::new());
    Arc::new(rows)
}

impl Refinement {
    /// The family `{∅}` with `R_∅ = {()}`.
    pub fn empty(query: Arc<Cq>, structure: Arc<Structure>) -> Result<Self> {
        if !query.is_quantifier_free() {
            return Err(Error::NotQuantifierFree);
        }
        query.check_signature(structure.signature())?;
        let atoms = Arc::new(NormalizedAtom::all(&query, &structure));
        let mut tables = BTreeMap::new();
        tables.insert(VarSet::EMPTY, unit_table());
        Ok(Refinement {
            query,
            structure,
            atoms,
            tables,
        })
    }

    /// A refinement with the given tables. The family must be closed under
    /// subsets and every row must have one value per variable of its set.
    pub fn with_tables(
        query: Arc<Cq>,
        structure: Arc<Structure>,
        tables: impl IntoIterator<Item = (VarSet, RowSet)>,
    ) -> Result<Self> {
        let mut r = Refinement::empty(query, structure)?;
        r.tables.clear();
        for (s, rows) in tables {
            if !s.is_subset(r.query.vars()) {
                return Err(Error::Scope);
            }
            if rows.iter().any(|row| row.len() != s.len()) {
                return Err(Error::Scope);
            }
            r.tables.insert(s, Arc::new(rows));
        }
        if !is_subset_closed(&r.family()) {
            return Err(Error::NotSubsetClosed);
        }
        Ok(r)
    }

    /// Tables `R_S = [[φ⟨S⟩]]A` for every `S` in `family`.
    pub fn projections(query: Arc<Cq>, structure: Arc<Structure>, family: &[VarSet]) -> Result<Self> {
        let base = Refinement::empty(query.clone(), structure.clone())?;
        let ev = base.base_evaluator();
        let tables: Vec<(VarSet, RowSet)> = family
            .iter()
            .map(|&s| (s, ev.solve(s).into_iter().collect()))
            .collect();
        Refinement::with_tables(query, structure, tables)
    }

    pub fn query(&self) -> &Arc<Cq> {
        &self.query
    }

    pub fn structure(&self) -> &Arc<Structure> {
        &self.structure
    }

    pub fn base_atoms(&self) -> &[NormalizedAtom] {
        &self.atoms
    }

    /// Members of the family in canonical order.
    pub fn family(&self) -> Vec<VarSet> {
        let mut f: Vec<VarSet> = self.tables.keys().copied().collect();
        f.sort_by(|a, b| a.canonical_cmp(*b));
        f
    }

    pub fn contains(&self, s: VarSet) -> bool {
        self.tables.contains_key(&s)
    }

    pub fn table(&self, s: VarSet) -> Option<&Arc<RowSet>> {
        self.tables.get(&s)
    }

    pub fn tables(&self) -> impl Iterator<Item = (VarSet, &Arc<RowSet>)> {
        self.tables.iter().map(|(s, t)| (*s, t))
    }

    /// Replaces (or adds) one table.
    pub fn set_table(&mut self, s: VarSet, rows: RowSet) {
        self.tables.insert(s, Arc::new(rows));
    }

    /// Some table is empty, so the refined query has no answers.
    pub fn is_trivial(&self) -> bool {
        self.tables.values().any(|t| t.is_empty())
    }

    pub fn total_rows(&self) -> usize {
        self.tables.values().map(|t| t.len()).sum()
    }

    pub fn max_table(&self) -> usize {
        self.tables.values().map(|t| t.len()).max().unwrap_or(0)
    }

    pub fn refined_query(&self) -> RefinedQuery {
        refine_query(&self.query, &self.family()).expect("family inside the query's variables")
    }

    fn base_evaluator(&self) -> Evaluator {
        Evaluator::new(self.atoms.iter().map(|a| (a.vars, a.rows.clone())))
    }

    /// Evaluator for the refined query: base atoms followed by all tables.
    pub fn evaluator(&self) -> Evaluator {
        let mut ev = self.base_evaluator();
        for (s, t) in &self.tables {
            ev.push(*s, t.clone());
        }
        ev
    }

    /// Answers of the refined query on the expanded structure, sorted.
    pub fn answers(&self) -> Vec<Row> {
        let mut rows = self.evaluator().solve(self.query.vars());
        rows.sort_unstable();
        rows
    }

    fn clear_all(&mut self) {
        for t in self.tables.values_mut() {
            *t = Arc::new(RowSet::default());
        }
    }

    /// One line per family member: the set and its table size.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in self.family() {
            let _ = writeln!(out, "{} {}", self.query.fmt_set(s), self.tables[&s].len());
        }
        out
    }
}

struct Pair {
    sub: usize,
    sup: usize,
    /// Row of `sub` that each row of `sup` projects to.
    proj: Vec<Option<u32>>,
    /// Rows of `sup` projecting to each row of `sub`.
    groups: Vec<Vec<u32>>,
}

/// Definite Horn clauses over deletion variables `d[S][h]`, one per row:
/// a row of `S` is deleted once every extension in a superset table is
/// deleted, and a row of `T` is deleted once its projection to a subset is.
pub struct HornInstance {
    sizes: Vec<usize>,
    pairs: Vec<Pair>,
    by_sub: Vec<Vec<usize>>,
    by_sup: Vec<Vec<usize>>,
    facts: Vec<(usize, u32)>,
    clauses: usize,
}

impl HornInstance {
    /// `seeds` are deletions known beforehand, per table in `sets` order.
    pub fn build(sets: &[VarSet], tables: &[Arc<RowSet>], seeds: &[Vec<bool>]) -> Self {
        let n = sets.len();
        let mut pairs = Vec::new();
        let mut facts = Vec::new();
        for (j, seed) in seeds.iter().enumerate() {
            facts.extend((0..seed.len()).filter(|&r| seed[r]).map(|r| (j, r as u32)));
        }
        let mut by_sub = vec![Vec::new(); n];
        let mut by_sup = vec![Vec::new(); n];
        let mut clauses = 0;
        let mut buf = Vec::new();
        for sub in 0..n {
            for sup in 0..n {
                if !sets[sub].is_proper_subset(sets[sup]) {
                    continue;
                }
                let (rs, rt) = (&tables[sub], &tables[sup]);
                let mut groups = vec![Vec::new(); rs.len()];
                let mut proj = Vec::with_capacity(rt.len());
                for (h, row) in rt.iter().enumerate() {
                    project_row(sets[sup], row, sets[sub], &mut buf);
                    let g = rs.get_index_of(buf.as_slice()).map(|g| g as u32);
                    match g {
                        Some(g) => groups[g as usize].push(h as u32),
                        None => facts.push((sup, h as u32)),
                    }
                    proj.push(g);
                }
                for (g, grp) in groups.iter().enumerate() {
                    if grp.is_empty() {
                        facts.push((sub, g as u32));
                    }
                }
                clauses += rs.len() + rt.len();
                by_sub[sub].push(pairs.len());
                by_sup[sup].push(pairs.len());
                pairs.push(Pair {
                    sub,
                    sup,
                    proj,
                    groups,
                });
            }
        }
        HornInstance {
            sizes: tables.iter().map(|t| t.len()).collect(),
            pairs,
            by_sub,
            by_sup,
            facts,
            clauses,
        }
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses
    }

    /// Minimal model: the set of deletion variables forced true.
    pub fn solve(&self) -> Vec<Vec<bool>> {
        let mut deleted: Vec<Vec<bool>> = self.sizes.iter().map(|&n| vec![false; n]).collect();
        let mut alive: Vec<Vec<u32>> = self
            .pairs
            .iter()
            .map(|p| p.groups.iter().map(|g| g.len() as u32).collect())
            .collect();
        let mut queue = Vec::new();
        for &(j, r) in &self.facts {
            if !deleted[j][r as usize] {
                deleted[j][r as usize] = true;
                queue.push((j, r));
            }
        }
        while let Some((j, r)) = queue.pop() {
            for &p in &self.by_sup[j] {
                let pair = &self.pairs[p];
                if let Some(g) = pair.proj[r as usize] {
                    let c = &mut alive[p][g as usize];
                    *c -= 1;
                    if *c == 0 && !deleted[pair.sub][g as usize] {
                        deleted[pair.sub][g as usize] = true;
                        queue.push((pair.sub, g));
                    }
                }
            }
            for &p in &self.by_sub[j] {
                let pair = &self.pairs[p];
                for &h in &pair.groups[r as usize] {
                    if !deleted[pair.sup][h as usize] {
                        deleted[pair.sup][h as usize] = true;
                        queue.push((pair.sup, h));
                    }
                }
            }
        }
        deleted
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConsistencyReport {
    pub rounds: usize,
    pub deleted: usize,
    /// Largest Horn instance built, in clauses.
    pub clauses: usize,
    /// `|s|` and the largest table when that instance was built.
    pub family_size: usize,
    pub max_table: usize,
}

pub fn make_consistent(r: &Refinement) -> Refinement {
    make_consistent_report(r).0
}

/// Largest consistent sub-refinement: rows failing their own projected
/// query are seeds, and Horn propagation removes rows without extensions
/// or with removed projections.
pub fn make_consistent_report(r: &Refinement) -> (Refinement, ConsistencyReport) {
    let mut cur = r.clone();
    let mut report = ConsistencyReport::default();
    loop {
        report.rounds += 1;
        let sets: Vec<VarSet> = cur.tables.keys().copied().collect();
        let tables: Vec<Arc<RowSet>> = cur.tables.values().cloned().collect();
        let ev = cur.evaluator();
        let mut scratch = Vec::new();
        let seeds: Vec<Vec<bool>> = sets
            .iter()
            .zip(&tables)
            .map(|(&s, t)| {
                let checker = ev.checker(s);
                t.iter().map(|row| !checker.check(row, &mut scratch)).collect()
            })
            .collect();
        let horn = HornInstance::build(&sets, &tables, &seeds);
        if horn.num_clauses() > report.clauses {
            report.clauses = horn.num_clauses();
            report.family_size = sets.len();
            report.max_table = cur.max_table();
        }
        let deleted = horn.solve();
        let count: usize = deleted.iter().map(|d| d.iter().filter(|&&x| x).count()).sum();
        if count == 0 {
            break;
        }
        report.deleted += count;
        for ((s, t), del) in sets.iter().zip(&tables).zip(&deleted) {
            let kept: RowSet = t
                .iter()
                .zip(del)
                .filter(|(_, &d)| !d)
                .map(|(row, _)| row.clone())
                .collect();
            cur.tables.insert(*s, Arc::new(kept));
        }
        if cur.is_trivial() {
            cur.clear_all();
            break;
        }
    }
    (cur, report)
}

/// Join of two tables restricted to `[[φ_s⟨S ∪ T⟩]]`, or `None` as soon as
/// it is known to have more than `bound` rows.
///
/// Constraints are split by where their key in `S ∪ T` lives: inside `S`,
/// inside `T`, or across both. Rows of each side are pre-filtered and
/// grouped by the columns the cross constraints and the shared variables
/// need, so the size is counted per group pair and rows are only built
/// when the count fits.
pub fn bounded_join(
    ev: &Evaluator,
    s: VarSet,
    rs: &RowSet,
    t: VarSet,
    rt: &RowSet,
    bound: usize,
) -> Option<RowSet> {
    let u = s.union(t);
    let shared = s.intersection(t);
    if ev.unsatisfiable() {
        return Some(RowSet::default());
    }
    let (mut on_s, mut on_t, mut mixed) = (Vec::new(), Vec::new(), Vec::new());
    for (i, key) in ev.keys_within(u) {
        if key.is_subset(s) {
            on_s.push((i, key));
        } else if key.is_subset(t) {
            on_t.push((i, key));
        } else {
            mixed.push((i, key));
        }
    }
    let mixed_vars = mixed.iter().fold(VarSet::EMPTY, |acc, &(_, k)| acc.union(k));
    let zs = shared.union(mixed_vars.intersection(s));
    let zt = shared.union(mixed_vars.intersection(t));
    let z = zs.union(zt);
    let mut scratch = Vec::new();
    let group = |side: VarSet, rows: &RowSet, keys: &[(usize, VarSet)], by: VarSet| {
        let checker = ev.checker_keys(side, keys);
        let mut groups: FxHashMap<Row, Vec<u32>> = FxHashMap::default();
        let mut scratch = Vec::new();
        let mut buf = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if checker.check(row, &mut scratch) {
                project_row(side, row, by, &mut buf);
                groups.entry(buf.clone()).or_default().push(i as u32);
            }
        }
        groups
    };
    let gs = group(s, rs, &on_s, zs);
    let gt = group(t, rt, &on_t, zt);
    // Partner groups on the T side are looked up by the shared variables
    // plus, when there are cross constraints, the T-only part of the one
    // with the fewest rows; its projection then proposes the values.
    let pivot = mixed
        .iter()
        .copied()
        .min_by_key(|&(i, key)| ev.projection(i, key).len());
    let (lookup, cands) = match pivot {
        Some((i, key)) => {
            let from = key.intersection(s);
            let to = key.difference(s);
            let mut cands: FxHashMap<Row, Vec<Row>> = FxHashMap::default();
            let mut a = Vec::new();
            let mut b = Vec::new();
            ev.projection(i, key).for_each(|row| {
                project_row(key, row, from, &mut a);
                project_row(key, row, to, &mut b);
                cands.entry(a.clone()).or_default().push(b.clone());
            });
            (shared.union(to), Some((from, to, cands)))
        }
        None => (shared, None),
    };
    let mut gt_by_key: FxHashMap<Row, Vec<(&Row, &Vec<u32>)>> = FxHashMap::default();
    let mut buf = Vec::new();
    for (key, rows) in &gt {
        project_row(zt, key, lookup, &mut buf);
        gt_by_key.entry(buf.clone()).or_default().push((key, rows));
    }
    let cross = ev.checker_keys(z, &mixed);
    let mut count = 0usize;
    let mut matched: Vec<(&Vec<u32>, &Vec<u32>)> = Vec::new();
    let mut merged = Vec::new();
    let mut shared_vals = Vec::new();
    let mut from_vals = Vec::new();
    let mut probe = Vec::new();
    let no_cands: Vec<Row> = vec![Vec::new()];
    for (key_s, rows_s) in &gs {
        project_row(zs, key_s, shared, &mut shared_vals);
        let proposals: &[Row] = match &cands {
            Some((from, _, map)) => {
                project_row(zs, key_s, *from, &mut from_vals);
                match map.get(from_vals.as_slice()) {
                    Some(list) => list,
                    None => continue,
                }
            }
            None => &no_cands,
        };
        for prop in proposals {
            match &cands {
                Some((_, to, _)) => merge_rows(shared, &shared_vals, *to, prop, &mut probe),
                None => probe.clone_from(&shared_vals),
            }
            let Some(partners) = gt_by_key.get(probe.as_slice()) else {
                continue;
            };
            for &(key_t, rows_t) in partners {
                if !mixed.is_empty() {
                    merge_rows(zs, key_s, zt, key_t, &mut merged);
                    if !cross.check(&merged, &mut scratch) {
                        continue;
                    }
                }
                count += rows_s.len() * rows_t.len();
                if count > bound {
                    return None;
                }
                matched.push((rows_s, rows_t));
            }
        }
    }
    let mut out = RowSet::with_capacity_and_hasher(count, Default::default());
    for (rows_s, rows_t) in matched {
        for &g in rows_s {
            for &h in rows_t {
                merge_rows(s, &rs[g as usize], t, &rt[h as usize], &mut merged);
                out.insert(merged.clone());
            }
        }
    }
    debug_assert_eq!(out.len(), count);
    Some(out)
}

#[derive(Clone, Debug, Default)]
pub struct StrongReport {
    pub rounds: usize,
    /// Largest table materialized by a bounded join.
    pub max_materialized: usize,
    pub consistency: ConsistencyReport,
}

/// A strongly M-consistent refinement of `φ` and `A` (requires `M ≥ m`).
pub fn make_strongly_m_consistent(phi: &Cq, a: &Arc<Structure>, m_bound: u64) -> Result<Refinement> {
    let m = a.stats().m;
    if (m as u64) > m_bound {
        return Err(Error::BadM { m_bound, m });
    }
    let r = Refinement::empty(Arc::new(phi.clone()), a.clone())?;
    Ok(strengthen(r, m_bound).0)
}

/// Runs the growth loop from an existing refinement until no set joins the
/// family: add M-small sets level by level, add unions of pairs whose join
/// stays within `M`, then restore consistency.
///
/// The union found in the second step is added together with projections
/// of its table onto any missing subsets, which keeps the family closed
/// under subsets at every point.
pub fn strengthen(r: Refinement, m_bound: u64) -> (Refinement, StrongReport) {
    let bound = usize::try_from(m_bound).unwrap_or(usize::MAX);
    let vars = r.query.vars();
    let domain: RowSet = (0..r.structure.domain().len() as u32).map(|c| vec![c]).collect();
    let mut report = StrongReport::default();
    let (mut r, cons) = make_consistent_report(&r);
    report.consistency = cons;
    loop {
        report.rounds += 1;
        let before: FxHashSet<VarSet> = r.tables.keys().copied().collect();
        let mut ev = r.evaluator();
        let mut levels: Vec<VarSet> = vars.subsets().filter(|s| !s.is_empty()).collect();
        levels.sort_by(|a, b| a.canonical_cmp(*b));
        for s in levels {
            if r.contains(s) || !s.iter().all(|x| r.contains(s.without(x))) {
                continue;
            }
            let x = s.min().unwrap();
            let rest = s.without(x);
            let single = VarSet::singleton(x);
            let r_rest = r.tables[&rest].clone();
            let r_x = r.tables.get(&single).cloned();
            let cands = r_x.as_deref().unwrap_or(&domain);
            if let Some(rows) = bounded_join(&ev, rest, &r_rest, single, cands, bound) {
                report.max_materialized = report.max_materialized.max(rows.len());
                let rows = Arc::new(rows);
                ev.push(s, rows.clone());
                r.tables.insert(s, rows);
            }
        }
        let family = r.family();
        let mut tried: FxHashSet<VarSet> = FxHashSet::default();
        for (i, &s) in family.iter().enumerate() {
            for &t in &family[i + 1..] {
                let u = s.union(t);
                if r.contains(u) || !tried.insert(u) {
                    continue;
                }
                let (rs, rt) = (r.tables[&s].clone(), r.tables[&t].clone());
                if let Some(rows) = bounded_join(&ev, s, &rs, t, &rt, bound) {
                    report.max_materialized = report.max_materialized.max(rows.len());
                    let mut buf = Vec::new();
                    for w in u.subsets() {
                        if r.contains(w) {
                            continue;
                        }
                        let mut proj = RowSet::default();
                        for row in &rows {
                            project_row(u, row, w, &mut buf);
                            if !proj.contains(buf.as_slice()) {
                                proj.insert(buf.clone());
                            }
                        }
                        let proj = Arc::new(proj);
                        ev.push(w, proj.clone());
                        r.tables.insert(w, proj);
                    }
                }
            }
        }
        let (next, cons) = make_consistent_report(&r);
        if cons.clauses > report.consistency.clauses {
            report.consistency.clauses = cons.clauses;
            report.consistency.family_size = cons.family_size;
            report.consistency.max_table = cons.max_table;
        }
        report.consistency.deleted += cons.deleted;
        r = next;
        let after: FxHashSet<VarSet> = r.tables.keys().copied().collect();
        debug!(
            "strengthen round {}: |s| = {}, rows = {}",
            report.rounds,
            after.len(),
            r.total_rows()
        );
        if after == before {
            break;
        }
    }
    (r, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{four_cycle_instance, FOUR_CYCLE};
    use crate::relmodel::Signature;

    fn rows(v: &[&[u32]]) -> RowSet {
        v.iter().map(|r| r.to_vec()).collect()
    }

    fn edge_structure(edges: &[(&str, &str)]) -> Arc<Structure> {
        let mut sig = Signature::new();
        sig.add("E", 2).unwrap();
        let mut b = Structure::builder(sig);
        for &(x, y) in edges {
            b.insert("E", &[x, y]).unwrap();
        }
        Arc::new(b.finish())
    }

    #[test]
    fn deletes_unextendable_row() {
        let a = edge_structure(&[("1", "1"), ("2", "2")]);
        let phi = Arc::new(Cq::parse("E(x,y)").unwrap());
        let (x, y) = (VarSet::singleton(0), VarSet::singleton(1));
        let one = a.domain().id("1").unwrap();
        let two = a.domain().id("2").unwrap();
        let r = Refinement::with_tables(
            phi,
            a,
            [
                (VarSet::EMPTY, rows(&[&[]])),
                (x, rows(&[&[one], &[two]])),
                (y, rows(&[&[one], &[two]])),
                (x.union(y), rows(&[&[one, one]])),
            ],
        )
        .unwrap();
        let c = make_consistent(&r);
        assert_eq!(**c.table(x).unwrap(), rows(&[&[one]]));
        assert_eq!(**c.table(y).unwrap(), rows(&[&[one]]));
        let again = make_consistent(&c);
        for s in c.family() {
            assert_eq!(c.table(s), again.table(s));
        }
    }

    #[test]
    fn cascade_to_empty() {
        let a = edge_structure(&[("1", "1"), ("2", "2")]);
        let phi = Arc::new(Cq::parse("E(x,y)").unwrap());
        let (x, y) = (VarSet::singleton(0), VarSet::singleton(1));
        let one = a.domain().id("1").unwrap();
        let two = a.domain().id("2").unwrap();
        let r = Refinement::with_tables(
            phi,
            a,
            [
                (VarSet::EMPTY, rows(&[&[]])),
                (x, rows(&[&[one]])),
                (y, rows(&[&[two]])),
                (x.union(y), rows(&[&[one, two]])),
            ],
        )
        .unwrap();
        let c = make_consistent(&r);
        assert!(c.tables().all(|(_, t)| t.is_empty()));
    }

    #[test]
    fn large_bound_gives_full_power_set() {
        let a = Arc::new(four_cycle_instance(3));
        let phi = Cq::parse(FOUR_CYCLE).unwrap();
        let n = a.stats().n as u64;
        let r = make_strongly_m_consistent(&phi, &a, n.pow(4)).unwrap();
        assert_eq!(r.family().len(), 16);
        let vars = phi.vars();
        // Once the full variable set is in the family, consistency makes
        // every table the projection of the answer set.
        let answers = Refinement::projections(Arc::new(phi), a, &[VarSet::EMPTY])
            .unwrap()
            .answers();
        let mut buf = Vec::new();
        for s in r.family() {
            let expect: FxHashSet<Row> = answers
                .iter()
                .map(|row| {
                    project_row(vars, row, s, &mut buf);
                    buf.clone()
                })
                .collect();
            assert_eq!(r.table(s).unwrap().iter().cloned().collect::<FxHashSet<_>>(), expect);
        }
    }

    #[test]
    fn four_cycle_with_m_equal_8() {
        let a = Arc::new(four_cycle_instance(4));
        let phi = Cq::parse(FOUR_CYCLE).unwrap();
        let r = make_strongly_m_consistent(&phi, &a, 8).unwrap();
        let set = |names: &[&str]| phi.var_set(names.iter().copied()).unwrap();
        assert!(!r.contains(set(&["x1", "x2", "x3"])));
        for pair in [["x1", "x2"], ["x2", "x3"], ["x3", "x4"], ["x1", "x4"]] {
            assert!(r.contains(set(&pair)), "{pair:?}");
        }
        assert!(r.max_table() <= 8);
        assert!(matches!(
            make_strongly_m_consistent(&phi, &a, 7),
            Err(Error::BadM { m_bound: 7, m: 8 })
        ));
    }

    #[test]
    fn empty_relation_makes_everything_small() {
        let mut sig = Signature::new();
        sig.add("E", 2).unwrap();
        sig.add("F", 2).unwrap();
        let mut b = Structure::builder(sig);
        b.insert("E", &["1", "2"]).unwrap();
        let a = Arc::new(b.finish());
        let phi = Cq::parse("E(x,y), F(y,z)").unwrap();
        let r = make_strongly_m_consistent(&phi, &a, 1).unwrap();
        assert_eq!(r.family().len(), 8);
        assert!(r.tables().all(|(_, t)| t.is_empty()));
        assert!(r.answers().is_empty());
    }
}
