//! Computes a strongly M-consistent refinement of the 4-cycle on its
//! worst-case instance and checks it with the brute-force oracle.
//!
//! `cargo run --example strong_consistency -- [ell] [M]`

use std::sync::Arc;

use cqenum::consistency::{make_consistent_report, strengthen, Refinement};
use cqenum::cq::Cq;
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE};
use cqenum::oracle::{brute_eval, check_refinement};

/// Returns the family size of the refinement.
pub fn run_example(ell: usize, m_bound: Option<u64>) -> cqenum::Result<usize> {
    let phi = Arc::new(Cq::parse(FOUR_CYCLE)?);
    let a = Arc::new(four_cycle_instance(ell));
    let m = a.stats().m as u64;
    let big_m = m_bound.unwrap_or(m * m);

    let start = Refinement::empty(phi.clone(), a.clone())?;
    let (r, rep) = strengthen(start, big_m);
    println!(
        "M = {big_m}: {} sets, {} rows, largest table {}, {} rounds, largest join {}",
        r.family().len(),
        r.total_rows(),
        r.max_table(),
        rep.rounds,
        rep.max_materialized
    );
    print!("{}", r.dump());

    let (_, crep) = make_consistent_report(&r);
    println!("re-running consistency deletes {} rows", crep.deleted);

    let violations = check_refinement(&r, Some(big_m))?;
    println!("oracle: {} violations", violations.len());
    for v in &violations {
        println!("  {v}");
    }
    let answers = brute_eval(&phi, &a)?.len();
    println!("answers: oracle {answers}, refinement {}", r.answers().len());
    Ok(r.family().len())
}

fn main() -> cqenum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell = args.first().and_then(|s| s.parse().ok()).unwrap_or(4);
    let m = args.get(1).and_then(|s| s.parse().ok());
    run_example(ell, m)?;
    Ok(())
}
