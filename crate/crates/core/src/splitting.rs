//! Degree statistics, uniform refinements by recursive degree splits, and
//! the cost function used to pick decompositions per refinement.

use std::sync::Arc;

use log::{debug, warn};
use rustc_hash::FxHashMap;

use crate::consistency::{strengthen, Refinement};
use crate::cq::Cq;
use crate::decomp::TreeDecomposition;
use crate::error::{Error, Result};
use crate::relmodel::{RowSet, Structure};
use crate::varset::{project_row, VarSet};

/// Guard band for comparisons done in log space.
const LOG_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeReport {
    pub s: VarSet,
    pub t: VarSet,
    pub rs: usize,
    pub rt: usize,
    pub maxdeg: usize,
}

impl DegreeReport {
    /// `|R_T| / |R_S|` as a numerator/denominator pair.
    pub fn avgdeg(&self) -> (usize, usize) {
        (self.rt, self.rs)
    }

    pub fn avgdeg_f64(&self) -> f64 {
        self.rt as f64 / self.rs as f64
    }

    /// `maxdeg > m^ε · avgdeg`, decided in log space.
    pub fn violates(&self, eps: f64, m: usize) -> bool {
        let lhs = (self.maxdeg as f64).ln() - (self.rt as f64).ln() + (self.rs as f64).ln();
        lhs > eps * (m as f64).ln() + LOG_SLACK
    }
}

fn extension_counts(r: &Refinement, s: VarSet, t: VarSet) -> FxHashMap<Vec<u32>, usize> {
    let mut counts: FxHashMap<Vec<u32>, usize> = FxHashMap::default();
    let mut buf = Vec::new();
    for row in r.table(t).unwrap().iter() {
        project_row(t, row, s, &mut buf);
        match counts.get_mut(buf.as_slice()) {
            Some(c) => *c += 1,
            None => {
                counts.insert(buf.clone(), 1);
            }
        }
    }
    counts
}

pub fn degrees(r: &Refinement, s: VarSet, t: VarSet) -> Result<DegreeReport> {
    if !s.is_subset(t) {
        return Err(Error::NotNested);
    }
    let (Some(rs), Some(rt)) = (r.table(s), r.table(t)) else {
        return Err(Error::Scope);
    };
    if r.is_trivial() {
        return Err(Error::TrivialRefinement);
    }
    let maxdeg = extension_counts(r, s, t).into_values().max().unwrap_or(0);
    Ok(DegreeReport {
        s,
        t,
        rs: rs.len(),
        rt: rt.len(),
        maxdeg,
    })
}

/// Nested pairs `S ⊊ T` of the family, ordered by `(|S|, |T|, S, T)`.
pub fn nested_pairs(r: &Refinement) -> Vec<(VarSet, VarSet)> {
    let family = r.family();
    let mut pairs: Vec<(VarSet, VarSet)> = family
        .iter()
        .flat_map(|&s| {
            family
                .iter()
                .filter(move |&&t| s.is_proper_subset(t))
                .map(move |&t| (s, t))
        })
        .collect();
    pairs.sort_by(|a, b| {
        a.0.len()
            .cmp(&b.0.len())
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.0.canonical_cmp(b.0))
            .then(a.1.canonical_cmp(b.1))
    });
    pairs
}

/// The first pair violating ε-uniformity, if any.
pub fn first_violation(r: &Refinement, eps: f64, m: usize) -> Result<Option<DegreeReport>> {
    if m < 2 {
        return Err(Error::BadBase(m));
    }
    if r.is_trivial() {
        return Err(Error::TrivialRefinement);
    }
    for (s, t) in nested_pairs(r) {
        let d = degrees(r, s, t)?;
        if d.violates(eps, m) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

pub fn is_uniform(r: &Refinement, eps: f64, m: usize) -> Result<bool> {
    Ok(first_violation(r, eps, m)?.is_none())
}

/// Splits `R_S` by extension count into `T`: rows with at most
/// `m^{ε/2} · avgdeg(S,T)` extensions go to the first part, the rest to the
/// second. Ties go to the first part.
pub fn split_refinement(
    r: &Refinement,
    s: VarSet,
    t: VarSet,
    eps: f64,
    m: usize,
) -> Result<(Refinement, Refinement)> {
    if m < 2 {
        return Err(Error::BadBase(m));
    }
    let d = degrees(r, s, t)?;
    if !d.violates(eps, m) {
        return Err(Error::NotViolating);
    }
    let counts = extension_counts(r, s, t);
    let limit = eps / 2.0 * (m as f64).ln() + (d.rt as f64).ln() - (d.rs as f64).ln() + LOG_SLACK;
    let (mut small, mut large) = (RowSet::default(), RowSet::default());
    for g in r.table(s).unwrap().iter() {
        let c = counts.get(g).copied().unwrap_or(0);
        if c == 0 || (c as f64).ln() <= limit {
            small.insert(g.clone());
        } else {
            large.insert(g.clone());
        }
    }
    let mut low = r.clone();
    low.set_table(s, small);
    let mut high = r.clone();
    high.set_table(s, large);
    Ok((low, high))
}

/// `M = ⌊m'^c⌋` with `m' = max(m, 2)`.
pub fn m_bound(m: usize, c: f64) -> u64 {
    let base = m.max(2) as f64;
    let v = base.powf(c);
    // Round-off must not push an exact integer power below itself.
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        v.floor() as u64
    }
}

/// ε for the main construction: `min((1 − 1/(1+δ))^4, k^{-4})`.
pub fn epsilon_for(delta: f64, k: usize) -> f64 {
    let a = (1.0 - 1.0 / (1.0 + delta)).powi(4);
    let b = (k.max(1) as f64).powi(-4);
    a.min(b)
}

#[derive(Clone, Debug, Default)]
pub struct SplitReport {
    pub splits: usize,
    pub dropped: usize,
    pub max_depth: u64,
}

/// Strongly M-consistent, ε-uniform, non-trivial refinements whose answer
/// sets partition the answers of `φ` on `A`.
pub fn split_to_uniform(phi: &Cq, a: &Arc<Structure>, c: f64, eps: f64) -> Result<Vec<Refinement>> {
    Ok(split_to_uniform_report(phi, a, c, eps)?.0)
}

pub fn split_to_uniform_report(
    phi: &Cq,
    a: &Arc<Structure>,
    c: f64,
    eps: f64,
) -> Result<(Vec<Refinement>, SplitReport)> {
    if !(c >= 1.0 && eps > 0.0) {
        return Err(Error::BadParams(format!("need c >= 1 and eps > 0, got c = {c}, eps = {eps}")));
    }
    let m = a.stats().m.max(2);
    let bound = m_bound(m, c);
    let k = phi.num_vars() as u32;
    let guard = 2u64
        .saturating_pow(k)
        .saturating_mul((c / eps).ceil().min(u64::MAX as f64) as u64);
    let root = Refinement::empty(Arc::new(phi.clone()), a.clone())?;
    let ctx = Ctx { bound, eps, m, guard };
    let (out, report) = ctx.recurse(root, 0)?;
    debug!(
        "split_to_uniform: {} refinements, {} splits, depth {}",
        out.len(),
        report.splits,
        report.max_depth
    );
    Ok((out, report))
}

struct Ctx {
    bound: u64,
    eps: f64,
    m: usize,
    guard: u64,
}

impl Ctx {
    fn recurse(&self, r: Refinement, depth: u64) -> Result<(Vec<Refinement>, SplitReport)> {
        if depth > self.guard {
            return Err(Error::DepthExceeded(self.guard));
        }
        let (r, _) = strengthen(r, self.bound);
        let mut report = SplitReport {
            max_depth: depth,
            ..Default::default()
        };
        if r.is_trivial() {
            report.dropped = 1;
            return Ok((Vec::new(), report));
        }
        let Some(v) = first_violation(&r, self.eps, self.m)? else {
            return Ok((vec![r], report));
        };
        let (low, high) = split_refinement(&r, v.s, v.t, self.eps, self.m)?;
        drop(r);
        let (a, b) = rayon::join(|| self.recurse(low, depth + 1), || self.recurse(high, depth + 1));
        let (mut out, ra) = a?;
        let (rest, rb) = b?;
        out.extend(rest);
        report.splits = 1 + ra.splits + rb.splits;
        report.dropped = ra.dropped + rb.dropped;
        report.max_depth = ra.max_depth.max(rb.max_depth);
        Ok((out, report))
    }
}

/// `g(U) = (1 − ε^{1/3}) · log_m |R_U| + h(U)` for `U` in the family and
/// `(1 − ε^{1/3}) · c + h(U)` otherwise, with `h(U) = 2ε^{2/3}|U| − ε|U|²`.
#[derive(Clone, Debug)]
pub struct CostFunction {
    sizes: FxHashMap<VarSet, usize>,
    pub c: f64,
    pub eps: f64,
    pub m: usize,
}

impl CostFunction {
    pub fn new(r: &Refinement, c: f64, eps: f64, m: usize) -> Result<Self> {
        CostFunction::from_sizes(r.tables().map(|(s, t)| (s, t.len())), c, eps, m)
    }

    pub fn from_sizes(
        sizes: impl IntoIterator<Item = (VarSet, usize)>,
        c: f64,
        eps: f64,
        m: usize,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadBase(m));
        }
        Ok(CostFunction {
            sizes: sizes.into_iter().collect(),
            c,
            eps,
            m,
        })
    }

    pub fn h(&self, u: VarSet) -> f64 {
        let n = u.len() as f64;
        2.0 * self.eps.powf(2.0 / 3.0) * n - self.eps * n * n
    }

    pub fn eval(&self, u: VarSet) -> f64 {
        if u.is_empty() {
            return 0.0;
        }
        let scale = 1.0 - self.eps.cbrt();
        let main = match self.sizes.get(&u) {
            Some(0) => {
                warn!("cost of an empty table requested; using 0");
                0.0
            }
            Some(&n) => (n as f64).ln() / (self.m as f64).ln(),
            None => self.c,
        };
        scale * main + self.h(u)
    }
}

pub fn cost_eval(cf: &CostFunction, u: VarSet) -> f64 {
    cf.eval(u)
}

/// The decomposition minimizing the largest bag cost, with that cost.
/// Ties keep the earliest decomposition.
pub fn width_under_g<F, T>(tds: &[TreeDecomposition], g: F) -> Result<(usize, T)>
where
    F: Fn(VarSet) -> T,
    T: PartialOrd + Clone,
{
    let mut best: Option<(usize, T)> = None;
    for (i, td) in tds.iter().enumerate() {
        let mut worst: Option<T> = None;
        for &bag in &td.bags {
            let v = g(bag);
            if worst.as_ref().is_none_or(|w| v > *w) {
                worst = Some(v);
            }
        }
        let Some(worst) = worst else { continue };
        if best.as_ref().is_none_or(|(_, b)| worst < *b) {
            best = Some((i, worst));
        }
    }
    best.ok_or(Error::EmptyTdList)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::make_strongly_m_consistent;
    use crate::decomp::{enumerate_fc_tds, DEFAULT_VAR_CAP};
    use crate::fixtures::{four_cycle_instance, FOUR_CYCLE, FOUR_CYCLE_PROJECTED};
    use num_rational::Ratio;

    fn four_cycle_full(ell: usize) -> (Cq, Refinement) {
        let phi = Cq::parse(FOUR_CYCLE).unwrap();
        let a = Arc::new(four_cycle_instance(ell));
        let fam: Vec<VarSet> = VarSet::full(2).subsets().collect();
        let r = Refinement::projections(Arc::new(phi.clone()), a, &fam).unwrap();
        (phi, r)
    }

    #[test]
    fn degrees_on_worst_case() {
        let (_, r) = four_cycle_full(4);
        let x1 = VarSet::singleton(0);
        let x12 = VarSet::full(2);
        let d = degrees(&r, x1, x12).unwrap();
        assert_eq!((d.rt, d.rs, d.maxdeg), (8, 5, 4));
        let same = degrees(&r, x12, x12).unwrap();
        assert_eq!((same.avgdeg_f64(), same.maxdeg), (1.0, 1));
        assert!(matches!(degrees(&r, x12, x1), Err(Error::NotNested)));
        assert!(d.violates(0.1, 8));
        let v = first_violation(&r, 0.1, 8).unwrap().unwrap();
        assert_eq!((v.s, v.t), (x1, x12));
    }

    #[test]
    fn split_puts_hub_on_large_side() {
        let (_, r) = four_cycle_full(4);
        let x1 = VarSet::singleton(0);
        let (low, high) = split_refinement(&r, x1, VarSet::full(2), 0.1, 8).unwrap();
        let b = r.structure().domain().id("b").unwrap();
        assert_eq!(low.table(x1).unwrap().len(), 4);
        assert_eq!(high.table(x1).unwrap().iter().collect::<Vec<_>>(), vec![&vec![b]]);
        assert!(matches!(
            split_refinement(&r, x1, VarSet::full(2), 1.0, 8),
            Err(Error::NotViolating)
        ));
    }

    #[test]
    fn split_preserves_answers() {
        let phi = Cq::parse(FOUR_CYCLE).unwrap();
        let a = Arc::new(four_cycle_instance(5));
        let parts = split_to_uniform(&phi, &a, 1.5, 0.1).unwrap();
        let whole = make_strongly_m_consistent(&phi, &a, u64::MAX).unwrap().answers();
        let mut union: Vec<_> = parts.iter().flat_map(|p| p.answers()).collect();
        let total = union.len();
        union.sort();
        union.dedup();
        assert_eq!(total, union.len());
        assert_eq!(union, whole);
        for p in &parts {
            assert!(is_uniform(p, 0.1, 10).unwrap());
        }
    }

    #[test]
    fn cost_values() {
        let u = VarSet::singleton(0);
        let cf = CostFunction::from_sizes([(u, 16)], 2.0, 1.0 / 4096.0, 16).unwrap();
        assert!((cf.eval(u) - 3871.0 / 4096.0).abs() < 1e-12);
        // (15/16)·2 + 4/256 − 4/4096 = 7740/4096.
        assert!((cf.eval(VarSet::full(2)) - 7740.0 / 4096.0).abs() < 1e-12);
        assert_eq!(cf.eval(VarSet::EMPTY), 0.0);
        assert!(matches!(
            CostFunction::from_sizes([], 1.0, 0.1, 1),
            Err(Error::BadBase(1))
        ));
    }

    #[test]
    fn bound_rounding() {
        assert_eq!(m_bound(8, 1.0), 8);
        assert_eq!(m_bound(4, 1.5), 8);
        assert_eq!(m_bound(10, 2.0), 100);
        assert_eq!(m_bound(1, 1.0), 2);
        assert_eq!(m_bound(5, 1.5), 11);
    }

    #[test]
    fn widths_under_half_size() {
        let half = |u: VarSet| Ratio::new(u.len() as i64, 2);
        let phi = Cq::parse(FOUR_CYCLE).unwrap();
        let tds = enumerate_fc_tds(&phi, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(width_under_g(&tds, half).unwrap().1, Ratio::new(3, 2));
        let proj = Cq::parse(FOUR_CYCLE_PROJECTED).unwrap();
        let tds = enumerate_fc_tds(&proj, DEFAULT_VAR_CAP).unwrap();
        assert!(!tds.is_empty());
        let single = Cq::parse("R(x,y)").unwrap();
        let tds1 = enumerate_fc_tds(&single, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(width_under_g(&tds1, half).unwrap().1, Ratio::new(1, 1));
        assert!(matches!(width_under_g(&[], half), Err(Error::EmptyTdList)));
    }

    #[test]
    fn projected_cycle_has_width_two_under_free_count() {
        // g(U) = |U ∩ {x2,x4}| is modular, monotone and 1 on every atom.
        let proj = Cq::parse(FOUR_CYCLE_PROJECTED).unwrap();
        let free = proj.free();
        let g = |u: VarSet| u.intersection(free).len();
        for atom in proj.atoms() {
            assert_eq!(g(atom.vars()), 1);
        }
        let tds = enumerate_fc_tds(&proj, DEFAULT_VAR_CAP).unwrap();
        assert_eq!(width_under_g(&tds, g).unwrap().1, 2);
        let half = |u: VarSet| Ratio::new(u.len() as i64, 2);
        assert_eq!(width_under_g(&tds, half).unwrap().1, Ratio::new(3, 2));
    }
}
