//! End-to-end preprocessing: split into uniform refinements, pick a cheap
//! free-connex decomposition per refinement, and enumerate the union of the
//! resulting acyclic instances.

use std::sync::Arc;
use std::time::{Duration, Instant};

use log::info;
use rayon::prelude::*;

use crate::consistency::Refinement;
use crate::cq::{Atom, Cq};
use crate::decomp::{enumerate_fc_tds, TreeDecomposition, DEFAULT_VAR_CAP};
use crate::enumerate::{union_enumerate, EnumIndex, UnionEnumerator};
use crate::error::{Error, Result};
use crate::relmodel::{RowSet, Structure, Value};
use crate::splitting::{epsilon_for, m_bound, split_to_uniform_report, CostFunction};

/// Slack when comparing a bag cost against `w`.
const COST_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct PipelineParams {
    pub w: f64,
    pub delta: f64,
    pub var_cap: usize,
}

impl PipelineParams {
    pub fn new(w: f64, delta: f64) -> Result<Self> {
        if w.is_nan() || w < 1.0 || delta.is_nan() || delta <= 0.0 {
            return Err(Error::BadParams(format!("need w >= 1 and delta > 0, got w = {w}, delta = {delta}")));
        }
        Ok(PipelineParams {
            w,
            delta,
            var_cap: DEFAULT_VAR_CAP,
        })
    }

    pub fn c(&self) -> f64 {
        (1.0 + self.delta) * self.w
    }

    pub fn eps(&self, k: usize) -> f64 {
        epsilon_for(self.delta, k)
    }
}

/// One refinement with its selected decomposition and acyclic instance.
pub struct Part {
    pub refinement: Refinement,
    pub td: TreeDecomposition,
    pub max_cost: f64,
    /// Acyclic query over one relation per bag.
    pub psi: Cq,
    /// Rows per bag table.
    pub table_sizes: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct PreprocessReport {
    pub m: usize,
    pub m_bound: u64,
    pub c: f64,
    pub eps: f64,
    pub splits: usize,
    pub dropped: usize,
    pub candidate_tds: usize,
    pub refinement_rows: usize,
    pub split_time: Duration,
    pub total_time: Duration,
}

pub struct QueryIndex {
    query: Cq,
    parts: Vec<Part>,
    indexes: Vec<EnumIndex>,
    report: PreprocessReport,
}

fn bag_query(phi: &Cq, td: &TreeDecomposition) -> Cq {
    let atoms = td
        .bags
        .iter()
        .map(|&bag| {
            let names: Vec<&str> = bag.iter().map(|v| phi.var_name(v)).collect();
            Atom {
                relation: format!("R[{}]", names.join(",")),
                args: bag.iter().collect(),
            }
        })
        .collect();
    Cq::new(phi.var_names().to_vec(), atoms, phi.quantified().iter().collect())
        .expect("bags cover every variable")
}

/// Best decomposition for one refinement: max bag cost within `w`, then
/// smallest total table size. `Err(best)` carries the smallest max cost.
fn select_td(
    r: &Refinement,
    cf: &CostFunction,
    tds: &[TreeDecomposition],
    w: f64,
) -> std::result::Result<(usize, f64), f64> {
    let mut best_cost = f64::INFINITY;
    let mut chosen: Option<(usize, f64, usize)> = None;
    for (i, td) in tds.iter().enumerate() {
        let cost = td.bags.iter().map(|&b| cf.eval(b)).fold(f64::NEG_INFINITY, f64::max);
        best_cost = best_cost.min(cost);
        if cost > w + COST_SLACK {
            continue;
        }
        let Some(size) = td
            .bags
            .iter()
            .map(|&b| r.table(b).map(|t| t.len()))
            .sum::<Option<usize>>()
        else {
            continue;
        };
        let better = match chosen {
            None => true,
            Some((_, c, s)) => cost < c || (cost == c && size < s),
        };
        if better {
            chosen = Some((i, cost, size));
        }
    }
    chosen.map(|(i, c, _)| (i, c)).ok_or(best_cost)
}

pub fn preprocess(phi: &Cq, a: &Arc<Structure>, params: &PipelineParams) -> Result<QueryIndex> {
    let start = Instant::now();
    phi.check_signature(a.signature())?;
    let k = phi.num_vars();
    let c = params.c();
    let eps = params.eps(k);
    let m = a.stats().m.max(2);
    let tds = enumerate_fc_tds(phi, params.var_cap)?;
    if tds.is_empty() {
        return Err(Error::EmptyTdList);
    }
    let stripped = phi.strip_quantifiers();
    let (refinements, split) = split_to_uniform_report(&stripped, a, c, eps)?;
    let split_time = start.elapsed();
    info!(
        "{} refinements after {} splits in {:.3?}",
        refinements.len(),
        split.splits,
        split_time
    );
    let refinement_rows = refinements.iter().map(|r| r.total_rows()).sum();
    let built: Vec<Result<(Part, EnumIndex)>> = refinements
        .into_par_iter()
        .enumerate()
        .map(|(i, r)| {
            let cf = CostFunction::new(&r, c, eps, m)?;
            let (t, max_cost) = select_td(&r, &cf, &tds, params.w).map_err(|best| Error::WidthExceeded {
                refinement: i,
                w: params.w,
                best,
            })?;
            let td = tds[t].clone();
            let tables: Vec<RowSet> = td
                .bags
                .iter()
                .map(|b| (**r.table(*b).expect("selected bags are in the family")).clone())
                .collect();
            let table_sizes = tables.iter().map(|t| t.len()).collect();
            let witness = td.connex.clone().unwrap_or_default();
            let index = EnumIndex::from_tree(phi.free(), &td.bags, &td.edges, &witness, tables)?;
            let psi = bag_query(phi, &td);
            Ok((
                Part {
                    refinement: r,
                    td,
                    max_cost,
                    psi,
                    table_sizes,
                },
                index,
            ))
        })
        .collect();
    let mut parts = Vec::with_capacity(built.len());
    let mut indexes = Vec::with_capacity(built.len());
    for b in built {
        let (p, i) = b?;
        parts.push(p);
        indexes.push(i);
    }
    let report = PreprocessReport {
        m,
        m_bound: m_bound(m, c),
        c,
        eps,
        splits: split.splits,
        dropped: split.dropped,
        candidate_tds: tds.len(),
        refinement_rows,
        split_time,
        total_time: start.elapsed(),
    };
    Ok(QueryIndex {
        query: phi.clone(),
        parts,
        indexes,
        report,
    })
}

impl QueryIndex {
    pub fn query(&self) -> &Cq {
        &self.query
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn indexes(&self) -> &[EnumIndex] {
        &self.indexes
    }

    pub fn report(&self) -> &PreprocessReport {
        &self.report
    }

    /// Answers over the free variables in index order, without repetition.
    pub fn enumerate(&self) -> UnionEnumerator<'_> {
        union_enumerate(&self.indexes).expect("all parts share the free variables")
    }

    pub fn test(&self, b: &[Value]) -> Result<bool> {
        let mut steps = 0;
        self.test_counted(b, &mut steps)
    }

    pub fn test_counted(&self, b: &[Value], steps: &mut u64) -> Result<bool> {
        if b.len() != self.query.free().len() {
            return Err(Error::DomainMismatch);
        }
        for idx in &self.indexes {
            if idx.test_counted(b, steps)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
