//! Naive reference evaluation, independent of the indexed evaluator.
//!
//! Every atom is turned into the set of its tuples restricted to the
//! variables in scope (respecting repeated variables) by scanning the
//! relation, and valuations are searched by backtracking over the whole
//! domain.

use std::collections::BTreeSet;

use rustc_hash::FxHashSet;

use crate::consistency::Refinement;
use crate::cq::{Cq, ProjectedQuery, RefinedQuery};
use crate::error::{Error, Result};
use crate::relmodel::{Row, RowSet, Structure, Value};
use crate::varset::{Var, VarSet};

pub const DEFAULT_LIMIT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerSet {
    pub vars: VarSet,
    pub rows: BTreeSet<Row>,
}

impl AnswerSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &[Value]) -> bool {
        self.rows.contains(row)
    }

    pub fn to_vec(&self) -> Vec<Row> {
        self.rows.iter().cloned().collect()
    }

    /// Restriction of every row to `to`.
    pub fn project(&self, to: VarSet) -> AnswerSet {
        let pos: Vec<usize> = to.iter().map(|v| self.vars.rank(v)).collect();
        AnswerSet {
            vars: to,
            rows: self
                .rows
                .iter()
                .map(|r| pos.iter().map(|&p| r[p]).collect())
                .collect(),
        }
    }
}

/// An atom as argument list plus tuples.
pub struct RawAtom<'a> {
    pub args: Vec<Var>,
    pub rows: &'a RowSet,
}

struct Allowed {
    key: Vec<Var>,
    last: Var,
    set: FxHashSet<Row>,
}

fn allowed_for(atom: &RawAtom, scope: VarSet) -> (Vec<Var>, Option<Var>, FxHashSet<Row>) {
    let mut key: Vec<Var> = atom.args.iter().copied().filter(|v| scope.contains(*v)).collect();
    key.sort_unstable();
    key.dedup();
    let mut set = FxHashSet::default();
    'rows: for t in atom.rows.iter() {
        for i in 0..atom.args.len() {
            for j in 0..i {
                if atom.args[i] == atom.args[j] && t[i] != t[j] {
                    continue 'rows;
                }
            }
        }
        let proj: Row = key
            .iter()
            .map(|v| t[atom.args.iter().position(|a| a == v).unwrap()])
            .collect();
        set.insert(proj);
    }
    let last = key.last().copied();
    (key, last, set)
}

/// `[[ψ⟨scope⟩]]` over a domain of `n` elements: mappings of `scope` such
/// that every atom, restricted to `scope`, is matched by some tuple.
pub fn brute_scope(atoms: &[RawAtom], n: usize, scope: VarSet, limit: f64) -> Result<AnswerSet> {
    let estimate = (n as f64).powi(scope.len() as i32);
    if estimate > limit {
        return Err(Error::TooLarge(estimate));
    }
    let mut out = AnswerSet {
        vars: scope,
        rows: BTreeSet::new(),
    };
    let mut allowed = Vec::new();
    for a in atoms {
        match allowed_for(a, scope) {
            (key, Some(last), set) => allowed.push(Allowed { key, last, set }),
            // No variable in scope: the atom only asks for a matching tuple.
            (_, None, set) if set.is_empty() => return Ok(out),
            _ => {}
        }
    }
    let order: Vec<Var> = scope.iter().collect();
    let mut value = vec![0 as Value; order.iter().max().map_or(0, |&v| v + 1)];
    fn rec(
        depth: usize,
        order: &[Var],
        n: usize,
        value: &mut Vec<Value>,
        allowed: &[Allowed],
        out: &mut AnswerSet,
    ) {
        if depth == order.len() {
            out.rows.insert(order.iter().map(|&v| value[v]).collect());
            return;
        }
        let v = order[depth];
        let mut key = Vec::new();
        for c in 0..n as Value {
            value[v] = c;
            let ok = allowed.iter().filter(|a| a.last == v).all(|a| {
                key.clear();
                key.extend(a.key.iter().map(|&u| value[u]));
                a.set.contains(&key)
            });
            if ok {
                rec(depth + 1, order, n, value, allowed, out);
            }
        }
    }
    rec(0, &order, n, &mut value, &allowed, &mut out);
    Ok(out)
}

fn base_atoms<'a>(phi: &Cq, a: &'a Structure) -> Result<Vec<RawAtom<'a>>> {
    phi.check_signature(a.signature())?;
    Ok(phi
        .atoms()
        .iter()
        .map(|at| RawAtom {
            args: at.args.clone(),
            rows: &a.relation(&at.relation).unwrap().rows,
        })
        .collect())
}

/// `[[φ]]A` projected to the free variables.
pub fn brute_eval(phi: &Cq, a: &Structure) -> Result<AnswerSet> {
    brute_eval_with_limit(phi, a, DEFAULT_LIMIT)
}

pub fn brute_eval_with_limit(phi: &Cq, a: &Structure, limit: f64) -> Result<AnswerSet> {
    let atoms = base_atoms(phi, a)?;
    let all = brute_scope(&atoms, a.domain().len(), phi.vars(), limit)?;
    Ok(all.project(phi.free()))
}

/// `[[φ⟨S⟩]]A` for a projected query.
pub fn brute_eval_projected(pq: &ProjectedQuery, a: &Structure) -> Result<AnswerSet> {
    let atoms = base_atoms(&pq.base, a)?;
    brute_scope(&atoms, a.domain().len(), pq.scope, DEFAULT_LIMIT)
}

fn refined_atoms(b: &Refinement) -> Vec<RawAtom<'_>> {
    let a = b.structure();
    let mut atoms: Vec<RawAtom> = b
        .query()
        .atoms()
        .iter()
        .map(|at| RawAtom {
            args: at.args.clone(),
            rows: &a.relation(&at.relation).unwrap().rows,
        })
        .collect();
    for (s, t) in b.tables() {
        atoms.push(RawAtom {
            args: s.iter().collect(),
            rows: t,
        });
    }
    atoms
}

/// `[[φ_s⟨scope⟩]]B`: the refined query, tables included, restricted to
/// `scope`.
pub fn brute_refined_scope(b: &Refinement, scope: VarSet, limit: f64) -> Result<AnswerSet> {
    let atoms = refined_atoms(b);
    brute_scope(&atoms, b.structure().domain().len(), scope, limit)
}

/// `[[φ_s]]B` over all variables of the refined query.
pub fn brute_eval_refined(rq: &RefinedQuery, b: &Refinement) -> Result<AnswerSet> {
    if rq.family() != b.family().as_slice() {
        return Err(Error::SchemaMismatch);
    }
    brute_refined_scope(b, b.query().vars(), DEFAULT_LIMIT)
}

fn as_set(t: &RowSet) -> BTreeSet<Row> {
    t.iter().cloned().collect()
}

/// Violations of the refinement conditions, recomputed from definitions.
/// With `m_bound`, also checks that every subset of a member is M-small
/// and that every union of two members outside the family is not.
pub fn check_refinement(b: &Refinement, m_bound: Option<u64>) -> Result<Vec<String>> {
    let q = b.query();
    let mut bad = Vec::new();
    let family = b.family();
    let members: FxHashSet<VarSet> = family.iter().copied().collect();
    for &s in &family {
        let want = brute_refined_scope(b, s, DEFAULT_LIMIT)?;
        if want.rows != as_set(b.table(s).unwrap()) {
            bad.push(format!("table {} differs from its projected query", q.fmt_set(s)));
        }
    }
    for &s in &family {
        for &t in &family {
            if !s.is_proper_subset(t) {
                continue;
            }
            let rt = AnswerSet {
                vars: t,
                rows: as_set(b.table(t).unwrap()),
            };
            if rt.project(s).rows != as_set(b.table(s).unwrap()) {
                bad.push(format!(
                    "table {} is not the projection of {}",
                    q.fmt_set(s),
                    q.fmt_set(t)
                ));
            }
        }
    }
    if let Some(m) = m_bound {
        let mut sizes = rustc_hash::FxHashMap::default();
        let mut size_of = |u: VarSet| -> Result<usize> {
            if let Some(&n) = sizes.get(&u) {
                return Ok(n);
            }
            let n = brute_refined_scope(b, u, DEFAULT_LIMIT)?.len();
            sizes.insert(u, n);
            Ok(n)
        };
        for &s in &family {
            for t in s.subsets() {
                if size_of(t)? as u64 > m {
                    bad.push(format!("{} has a subset above M", q.fmt_set(s)));
                }
            }
        }
        for &s in &family {
            for &t in &family {
                let u = s.union(t);
                if !members.contains(&u) && size_of(u)? as u64 <= m {
                    bad.push(format!(
                        "{} ∪ {} is M-small but missing",
                        q.fmt_set(s),
                        q.fmt_set(t)
                    ));
                }
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::project_query;
    use crate::fixtures::{complete_digraph, TRIANGLE};

    #[test]
    fn triangle_on_complete_digraph() {
        let a = complete_digraph(3);
        let phi = Cq::parse(TRIANGLE).unwrap();
        assert_eq!(brute_eval(&phi, &a).unwrap().len(), 6);
    }

    #[test]
    fn projection_matches_single_edge() {
        let a = complete_digraph(4);
        let phi = Cq::parse(TRIANGLE).unwrap();
        let xz = phi.var_set(["x", "z"]).unwrap();
        let pq = project_query(&phi, xz).unwrap();
        let direct = brute_eval(&Cq::parse("E(x,z)").unwrap(), &a).unwrap();
        assert_eq!(brute_eval_projected(&pq, &a).unwrap().rows, direct.rows);
    }

    #[test]
    fn out_of_scope_atom_needs_a_matching_tuple() {
        let a = complete_digraph(3);
        let phi = Cq::parse("E(x,y), E(z,z)").unwrap();
        let pq = project_query(&phi, phi.var_set(["x", "y"]).unwrap()).unwrap();
        assert!(brute_eval_projected(&pq, &a).unwrap().is_empty());
        assert!(brute_eval(&phi, &a).unwrap().is_empty());
    }

    #[test]
    fn limit_guard() {
        let a = complete_digraph(20);
        let phi = Cq::parse(TRIANGLE).unwrap();
        assert!(matches!(
            brute_eval_with_limit(&phi, &a, 1000.0),
            Err(Error::TooLarge(_))
        ));
    }
}
