//! Runs the full pipeline on the worst-case 4-cycle instance and reports
//! refinement sizes, preprocessing time and the largest enumeration delay.
//!
//! `cargo run --release --example four_cycle_worst_case -- [ell] [w] [delta] [query]`
//! where `query` is `full` (default) or `projected`.

use std::sync::Arc;
use std::time::Instant;

use cqenum::cq::Cq;
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE, FOUR_CYCLE_PROJECTED};
use cqenum::pipeline::{preprocess, PipelineParams};

pub fn run_example(ell: usize, w: f64, delta: f64, projected: bool) -> cqenum::Result<u64> {
    let text = if projected { FOUR_CYCLE_PROJECTED } else { FOUR_CYCLE };
    let phi = Cq::parse(text)?;
    let a = Arc::new(four_cycle_instance(ell));
    let stats = a.stats();
    println!("query: {phi}");
    println!("ell = {ell}: n = {}, m = {}, size = {}", stats.n, stats.m, stats.size);

    let qi = preprocess(&phi, &a, &PipelineParams::new(w, delta)?)?;
    let rep = qi.report();
    println!(
        "M = {}, c = {:.3}, eps = {:.3e}, {} splits, {} refinements, {} rows kept, {:.3?}",
        rep.m_bound,
        rep.c,
        rep.eps,
        rep.splits,
        qi.parts().len(),
        rep.refinement_rows,
        rep.total_time
    );
    for (i, part) in qi.parts().iter().enumerate() {
        let bags: Vec<String> = part.td.bags.iter().map(|&b| phi.fmt_set(b)).collect();
        println!(
            "  part {i}: bags {} sizes {:?} max cost {:.4}",
            bags.join(" "),
            part.table_sizes,
            part.max_cost
        );
    }

    let start = Instant::now();
    let mut it = qi.enumerate();
    let (mut count, mut last, mut max_delay) = (0u64, 0u64, 0u64);
    while it.next().is_some() {
        count += 1;
        let now = it.steps();
        max_delay = max_delay.max(now - last);
        last = now;
    }
    println!(
        "{count} answers in {:.3?}, max delay {max_delay} steps",
        start.elapsed()
    );
    Ok(count)
}

fn main() -> cqenum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell = args.first().and_then(|s| s.parse().ok()).unwrap_or(64);
    let w = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let delta = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let projected = args.get(3).is_some_and(|s| s == "projected");
    run_example(ell, w, delta, projected)?;
    Ok(())
}
