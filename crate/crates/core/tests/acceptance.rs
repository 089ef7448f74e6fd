//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use cqenum::cli::{main_with, measure_delay, EXIT_WIDTH};
use cqenum::consistency::{make_consistent, make_strongly_m_consistent, Refinement};
use cqenum::cq::{project_query, Cq};
use cqenum::decomp::{enumerate_fc_tds, DEFAULT_VAR_CAP};
use cqenum::enumerate::{union_enumerate, EnumIndex};
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE, FOUR_CYCLE_PROJECTED, TRIANGLE};
use cqenum::oracle::{brute_eval, brute_eval_with_limit, check_refinement};
use cqenum::pipeline::{preprocess, PipelineParams, QueryIndex};
use cqenum::relmodel::{Row, RowSet, Value};
use cqenum::splitting::{epsilon_for, split_to_uniform, width_under_g, CostFunction};
use cqenum::varset::VarSet;
use cqenum::Error;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pipeline(phi: &Cq, ell: usize, w: f64, delta: f64) -> cqenum::Result<(QueryIndex, Duration)> {
    let a = Arc::new(four_cycle_instance(ell));
    let start = Instant::now();
    let qi = preprocess(phi, &a, &PipelineParams::new(w, delta)?)?;
    Ok((qi, start.elapsed()))
}

fn c1_projection_identity() -> cqenum::Result<Outcome> {
    let start = Instant::now();
    let phi = Cq::parse(TRIANGLE)?;
    let xz = phi.var_set(["x", "z"]).unwrap();
    let pq = project_query(&phi, xz)?;
    let mut r = rng(1);
    let mut mismatches = 0;
    for _ in 0..50 {
        let n = r.gen_range(1..=10);
        let density = r.gen_range(0.05..0.6);
        let a = random_structure(&mut r, n, &[("E", 2)], density);
        let got: BTreeSet<Row> = pq.eval(&a)?.into_iter().collect();
        let want: BTreeSet<Row> = a.relation("E").unwrap().rows.iter().cloned().collect();
        mismatches += usize::from(got != want);
    }
    let t = start.elapsed();
    Ok(outcome(
        mismatches == 0 && t < Duration::from_secs(1),
        format!("50 structures, {mismatches} mismatches, {t:.3?} (limit 1 s)"),
    ))
}

fn c2_four_cycle_correctness() -> cqenum::Result<Outcome> {
    let phi = Cq::parse(FOUR_CYCLE)?;
    let start = Instant::now();
    let (qi, _) = pipeline(&phi, 64, 1.5, 0.5)?;
    let out: Vec<Row> = qi.enumerate().collect();
    let t = start.elapsed();
    let got: BTreeSet<Row> = out.iter().cloned().collect();
    let truth = brute_eval(&phi, &four_cycle_instance(64))?;
    let dups = out.len() - got.len();
    Ok(outcome(
        got == truth.rows && dups == 0 && t < Duration::from_secs(5),
        format!(
            "{} answers, oracle {}, {dups} duplicates, sets equal: {}, {t:.3?} (limit 5 s)",
            out.len(),
            truth.len(),
            got == truth.rows
        ),
    ))
}

fn c3_split_effectiveness() -> cqenum::Result<Outcome> {
    let phi = Cq::parse(FOUR_CYCLE)?;
    let x123 = phi.var_set(["x1", "x2", "x3"]).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for ell in [16, 64] {
        let (qi, _) = pipeline(&phi, ell, 1.5, 0.5)?;
        let largest = qi
            .parts()
            .iter()
            .flat_map(|p| p.table_sizes.iter().copied())
            .max()
            .unwrap_or(0);
        let unsplit = project_query(&phi, x123)?.eval(&four_cycle_instance(ell))?.len();
        pass &= largest <= 4 * ell && unsplit >= ell * ell;
        notes.push(format!(
            "ell={ell}: largest bag table {largest} (<= {}), unsplit {{x1,x2,x3}} {unsplit} (>= {})",
            4 * ell,
            ell * ell
        ));
    }
    Ok(outcome(pass, notes.join("; ")))
}

/// Violations of monotonicity, edge domination, submodularity and
/// `g(∅) = 0`, over all pairs of subsets.
fn g_violations(phi: &Cq, g: &CostFunction) -> usize {
    let subsets: Vec<VarSet> = phi.vars().subsets().collect();
    let vals: Vec<(VarSet, f64)> = subsets.iter().map(|&u| (u, g.eval(u))).collect();
    let at = |u: VarSet| vals.iter().find(|(s, _)| *s == u).unwrap().1;
    let mut bad = usize::from(at(VarSet::EMPTY).abs() > TOL);
    for a in phi.atoms() {
        bad += usize::from(at(a.vars()) > 1.0 + TOL);
    }
    for &(u, gu) in &vals {
        for &(v, gv) in &vals {
            if u.is_subset(v) && gu > gv + TOL {
                bad += 1;
            }
            if gu + gv + TOL < at(u.union(v)) + at(u.intersection(v)) {
                bad += 1;
            }
        }
    }
    bad
}

fn c4_cost_function_properties() -> cqenum::Result<Outcome> {
    let (w, delta) = (1.5, 0.5);
    let c = (1.0 + delta) * w;
    let mut r = rng(4);
    let (mut refinements, mut violations) = (0, 0);
    for _ in 0..100 {
        let k = r.gen_range(2..=6);
        let (atoms, n, density) = (r.gen_range(1..=5), r.gen_range(2..=4), r.gen_range(0.2..0.6));
        let phi = random_query(&mut r, k, atoms, MIXED, 0.0);
        let a = Arc::new(random_structure(&mut r, n, MIXED, density));
        let eps = epsilon_for(delta, phi.num_vars());
        let m = a.stats().m.max(2);
        for part in split_to_uniform(&phi, &a, c, eps)? {
            refinements += 1;
            violations += g_violations(&phi, &CostFunction::new(&part, c, eps, m)?);
        }
    }
    Ok(outcome(
        violations == 0,
        format!("100 instances, {refinements} refinements, {violations} violations (tolerance {TOL:e})"),
    ))
}

fn c5_consistency_contract() -> cqenum::Result<Outcome> {
    let mut r = rng(5);
    let (mut unsound, mut not_idempotent, mut changed) = (0, 0, 0);
    for _ in 0..100 {
        let k = r.gen_range(2..=4);
        let phi = Arc::new(random_query(&mut r, k, k, BINARY, 0.0));
        let n = r.gen_range(2..=5);
        let a = Arc::new(random_structure(&mut r, n, BINARY, 0.5));
        let family = random_family(&mut r, phi.vars(), 3);
        let b = thin(&mut r, &Refinement::projections(phi, a, &family)?, 0.25);
        let c = make_consistent(&b);
        unsound += usize::from(!check_refinement(&c, None)?.is_empty());
        not_idempotent += usize::from(make_consistent(&c).dump() != c.dump() || tables_differ(&make_consistent(&c), &c));
        changed += usize::from(answer_set(&c) != answer_set(&b));
    }
    Ok(outcome(
        unsound + not_idempotent + changed == 0,
        format!(
            "100 refinements: {unsound} violate the table conditions, {not_idempotent} not idempotent, {changed} change answers"
        ),
    ))
}

fn tables_differ(x: &Refinement, y: &Refinement) -> bool {
    let collect = |r: &Refinement| -> Vec<(VarSet, BTreeSet<Row>)> {
        r.tables().map(|(s, t)| (s, t.iter().cloned().collect())).collect()
    };
    collect(x) != collect(y)
}

fn c6_strong_consistency_contract() -> cqenum::Result<Outcome> {
    let mut r = rng(6);
    let (mut bad, mut wrong, mut too_big, mut max_m) = (0, 0, 0, 0);
    for _ in 0..50 {
        let k = r.gen_range(2..=4);
        let (atoms, n, density) = (r.gen_range(k - 1..=k + 1), r.gen_range(2..=14), r.gen_range(0.1..0.6));
        let phi = random_query(&mut r, k, atoms, BINARY, 0.0);
        let a = Arc::new(random_structure(&mut r, n, BINARY, density));
        let m = (a.stats().m as u64).max(2);
        max_m = max_m.max(m);
        let big_m = r.gen_range(m..=m * m);
        let b = make_strongly_m_consistent(&phi, &a, big_m)?;
        bad += usize::from(!check_refinement(&b, Some(big_m))?.is_empty());
        wrong += usize::from(answer_set(&b) != brute_eval(&phi, &a)?.rows);
        too_big += usize::from(b.max_table() as u64 > big_m);
    }
    Ok(outcome(
        bad + wrong + too_big == 0 && max_m <= 200,
        format!(
            "50 instances (largest m {max_m}): {bad} violate the conditions, {wrong} change answers, {too_big} exceed M"
        ),
    ))
}

fn c7_disjoint_partition() -> cqenum::Result<Outcome> {
    let mut r = rng(7);
    let mut off = 0;
    let mut parts_seen = 0;
    for _ in 0..100 {
        let k = r.gen_range(2..=4);
        let (atoms, n, density) = (r.gen_range(k - 1..=k + 1), r.gen_range(2..=6), r.gen_range(0.2..0.6));
        let phi = random_query(&mut r, k, atoms, BINARY, 0.0);
        let a = Arc::new(random_structure(&mut r, n, BINARY, density));
        let parts = split_to_uniform(&phi, &a, 1.5, epsilon_for(0.5, k))?;
        parts_seen += parts.len();
        let sum: usize = parts.iter().map(|p| p.answers().len()).sum();
        off += usize::from(sum != brute_eval(&phi, &a)?.len());
    }
    Ok(outcome(
        off == 0,
        format!("100 instances, {parts_seen} refinements, {off} with sum != |answers|"),
    ))
}

fn unary(values: &BTreeSet<Value>) -> EnumIndex {
    let x = VarSet::singleton(0);
    let rows: RowSet = values.iter().map(|&v| vec![v]).collect();
    EnumIndex::from_tree(x, &[x], &[], &[0], vec![rows]).unwrap()
}

fn c8_union_trick() -> cqenum::Result<Outcome> {
    let mut failures = 0;
    let mut families = 0;
    for count in 1..=5u32 {
        for rate in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let shared = (20.0 * rate) as u32;
            let sets: Vec<BTreeSet<Value>> = (0..count)
                .map(|i| (0..shared).chain((0..20 - shared).map(|j| 1000 * (i + 1) + j)).collect())
                .collect();
            let idxs: Vec<EnumIndex> = sets.iter().map(unary).collect();
            let out: Vec<Value> = union_enumerate(&idxs)?.map(|r| r[0]).collect();
            let got: BTreeSet<Value> = out.iter().copied().collect();
            let want: BTreeSet<Value> = sets.iter().flatten().copied().collect();
            failures += usize::from(got != want || out.len() != got.len());
            families += 1;
        }
    }
    let pair = [unary(&[1, 2].into()), unary(&[2, 3].into())];
    let emitted = union_enumerate(&pair)?.count();
    Ok(outcome(
        failures == 0 && emitted == 3,
        format!("{families} families, {failures} wrong; {{1,2}} u {{2,3}} emitted {emitted} (want 3)"),
    ))
}

fn c9_delay_flatness() -> cqenum::Result<Outcome> {
    let phi = Cq::parse(FOUR_CYCLE)?;
    let (mut delays, mut notes) = (Vec::new(), Vec::new());
    let mut last_pre = Duration::ZERO;
    for ell in [1 << 8, 1 << 11, 1 << 14] {
        let (qi, pre) = pipeline(&phi, ell, 1.5, 0.01)?;
        let (delay, count) = measure_delay(&qi, u64::MAX);
        delays.push(delay);
        last_pre = pre;
        notes.push(format!("ell=2^{}: max delay {delay} steps over {count} answers, preprocessing {pre:.2?}", ell.trailing_zeros()));
    }
    let (lo, hi) = (*delays.iter().min().unwrap(), *delays.iter().max().unwrap());
    let ratio = hi as f64 / lo.max(1) as f64;
    Ok(outcome(
        ratio <= 2.0 && last_pre < Duration::from_secs(60),
        format!("{}; ratio {ratio:.2} (<= 2), w=1.5 delta=0.01", notes.join("; ")),
    ))
}

fn c10_testing_contract() -> cqenum::Result<Outcome> {
    let phi = Cq::parse(FOUR_CYCLE)?;
    let mut r = rng(10);
    let (mut wrong, mut worst) = (0, Vec::new());
    for ell in [16, 32, 64, 128] {
        let a = four_cycle_instance(ell);
        let truth = brute_eval_with_limit(&phi, &a, f64::INFINITY)?;
        let (qi, _) = pipeline(&phi, ell, 1.5, 0.5)?;
        let answers = truth.to_vec();
        let d = a.domain().len() as Value;
        let mut samples: Vec<(Row, bool)> = (0..500).map(|_| (answers.choose(&mut r).unwrap().clone(), true)).collect();
        while samples.len() < 1000 {
            let row: Row = (0..4).map(|_| r.gen_range(0..d)).collect();
            if !truth.contains(&row) {
                samples.push((row, false));
            }
        }
        let mut max_steps = 0;
        for (row, want) in &samples {
            let mut steps = 0;
            wrong += usize::from(qi.test_counted(row, &mut steps)? != *want);
            max_steps = max_steps.max(steps);
        }
        worst.push((ell, max_steps));
    }
    let lo = worst.iter().map(|w| w.1).min().unwrap();
    let hi = worst.iter().map(|w| w.1).max().unwrap();
    let ratio = hi as f64 / lo.max(1) as f64;
    let steps: Vec<String> = worst.iter().map(|(l, s)| format!("ell={l}: {s}")).collect();
    Ok(outcome(
        wrong == 0 && ratio <= 2.0,
        format!("4 instances x (500 positive + 500 negative), {wrong} wrong; max steps per test {}; ratio {ratio:.2} (<= 2)", steps.join(", ")),
    ))
}

fn half_size(u: VarSet) -> Ratio<i64> {
    Ratio::new(u.len() as i64, 2)
}

fn c11_width_facts() -> cqenum::Result<Outcome> {
    let mut vals = Vec::new();
    for text in [FOUR_CYCLE_PROJECTED, FOUR_CYCLE] {
        let phi = Cq::parse(text)?;
        let tds = enumerate_fc_tds(&phi, DEFAULT_VAR_CAP)?;
        let (best, width) = width_under_g(&tds, half_size)?;
        let bags: Vec<String> = tds[best].bags.iter().map(|&b| phi.fmt_set(b)).collect();
        vals.push((width, format!("{} decompositions, best {}", tds.len(), bags.join(" "))));
    }
    let pass = vals[0].0 == Ratio::from_integer(2) && vals[1].0 == Ratio::new(3, 2);
    Ok(outcome(
        pass,
        format!(
            "phi'_4: {} (want 2; {}), phi_4: {} (want 3/2; {})",
            vals[0].0, vals[0].1, vals[1].0, vals[1].1
        ),
    ))
}

fn c12_width_exceeded() -> cqenum::Result<Outcome> {
    let phi = Cq::parse(FOUR_CYCLE_PROJECTED)?;
    let lib = match pipeline(&phi, 64, 1.2, 0.5) {
        Err(Error::WidthExceeded { best, .. }) => Some(best),
        _ => None,
    };
    let dir = std::env::temp_dir().join(format!("cqenum-acceptance-{}", std::process::id()));
    four_cycle_instance(64).export(&dir)?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(
        ["cqenum", "run", "-e", FOUR_CYCLE_PROJECTED, "-d", dir.to_str().unwrap(), "--w", "1.2"],
        &mut out,
        &mut err,
    );
    std::fs::remove_dir_all(&dir).ok();
    let err = String::from_utf8_lossy(&err).trim().to_string();
    Ok(outcome(
        lib.is_some_and(|b| b.is_finite() && b > 1.2) && code == EXIT_WIDTH && err.contains("best"),
        format!("best min-max cost {lib:?}; cli exit {code}: {err}"),
    ))
}

type Check = fn() -> cqenum::Result<Outcome>;

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("projection identity", c1_projection_identity),
        ("worst-case 4-cycle correctness", c2_four_cycle_correctness),
        ("split effectiveness", c3_split_effectiveness),
        ("cost function properties", c4_cost_function_properties),
        ("consistency contract", c5_consistency_contract),
        ("strong M-consistency contract", c6_strong_consistency_contract),
        ("disjoint partition", c7_disjoint_partition),
        ("union trick", c8_union_trick),
        ("delay flatness", c9_delay_flatness),
        ("testing contract", c10_testing_contract),
        ("width facts", c11_width_facts),
        ("width exceeded", c12_width_exceeded),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failed += usize::from(!o.pass);
        println!(
            "criterion {n:>2} {:<32} {} [{:.1?}] {}",
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
