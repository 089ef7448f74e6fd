//! Splits the 4-cycle instance into ε-uniform refinements, prints the
//! degree profile of each one and scores every free-connex decomposition
//! with the cost function `g`.
//!
//! `cargo run --release --example uniform_split -- [ell] [c]`

use std::sync::Arc;

use cqenum::cq::Cq;
use cqenum::decomp::{enumerate_fc_tds, DEFAULT_VAR_CAP};
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE};
use cqenum::splitting::{
    degrees, epsilon_for, is_uniform, nested_pairs, split_to_uniform_report, width_under_g,
    CostFunction,
};

/// Returns the number of refinements and the largest selected width.
pub fn run_example(ell: usize, c: f64) -> cqenum::Result<(usize, f64)> {
    let phi = Cq::parse(FOUR_CYCLE)?;
    let a = Arc::new(four_cycle_instance(ell));
    let m = a.stats().m;
    let eps = epsilon_for(0.5, phi.num_vars());
    let (parts, rep) = split_to_uniform_report(&phi, &a, c, eps)?;
    println!(
        "m = {m}, c = {c}, eps = {eps:.3e}: {} refinements, {} splits, {} dropped",
        parts.len(),
        rep.splits,
        rep.dropped
    );

    let tds = enumerate_fc_tds(&phi, DEFAULT_VAR_CAP)?;
    let mut widest: f64 = 0.0;
    for (i, r) in parts.iter().enumerate() {
        println!("refinement {i}: uniform = {}", is_uniform(r, eps, m)?);
        for (s, t) in nested_pairs(r) {
            let d = degrees(r, s, t)?;
            if d.rs > 0 && d.maxdeg > 1 {
                println!(
                    "  {} -> {}: max {} avg {:.2}",
                    phi.fmt_set(s),
                    phi.fmt_set(t),
                    d.maxdeg,
                    d.avgdeg_f64()
                );
            }
        }
        let g = CostFunction::new(r, c, eps, m)?;
        let (best, width) = width_under_g(&tds, |u| g.eval(u))?;
        let bags: Vec<String> = tds[best].bags.iter().map(|&b| phi.fmt_set(b)).collect();
        println!("  best decomposition {}: width {width:.4}", bags.join(" "));
        widest = widest.max(width);
    }
    Ok((parts.len(), widest))
}

fn main() -> cqenum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell = args.first().and_then(|s| s.parse().ok()).unwrap_or(16);
    let c = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2.25);
    run_example(ell, c)?;
    Ok(())
}
