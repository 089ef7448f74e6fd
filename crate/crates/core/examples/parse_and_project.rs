//! Parses a query, lists its variables and evaluates some projections
//! `φ⟨S⟩` (every atom cut down to `S`) on the 4-cycle instance. Ends with
//! the refined query over the subsets of `{x2, x4}`.
//!
//! `cargo run --example parse_and_project -- [ell]`

use cqenum::cq::{project_query, refine_query, Cq};
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE_PROJECTED};
use cqenum::varset::VarSet;

/// Returns the sizes of `φ⟨x1,x3⟩` and `φ⟨x2,x4⟩`.
pub fn run_example(ell: usize) -> cqenum::Result<(usize, usize)> {
    let phi = Cq::parse(FOUR_CYCLE_PROJECTED)?;
    let a = four_cycle_instance(ell);
    println!("query: {phi}");
    println!(
        "variables {}, free {}, quantified {}",
        phi.fmt_set(phi.vars()),
        phi.fmt_set(phi.free()),
        phi.fmt_set(phi.quantified())
    );

    let stripped = phi.strip_quantifiers();
    let mut sizes = Vec::new();
    for names in [&["x1", "x3"][..], &["x2", "x4"], &["x1", "x2", "x3"], &["x1", "x2", "x3", "x4"]] {
        let s = stripped.var_set(names.iter().copied()).expect("known variables");
        let rows = project_query(&stripped, s)?.eval(&a)?;
        println!("  |phi<{}>| = {}", stripped.fmt_set(s), rows.len());
        sizes.push(rows.len());
    }

    let x24 = stripped.var_set(["x2", "x4"]).unwrap();
    let family: Vec<VarSet> = x24.subsets().collect();
    let refined = refine_query(&stripped, &family)?;
    println!("refined: {refined}");
    for (name, arity) in refined.signature() {
        println!("  {name}/{arity}");
    }
    Ok((sizes[0], sizes[1]))
}

fn main() -> cqenum::Result<()> {
    let ell = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    run_example(ell)?;
    Ok(())
}
