//! Enumerates the free-connex tree decompositions of a query, validates
//! each one and prints it in the text format accepted by
//! `TreeDecomposition::parse`. Also builds a join tree for an acyclic query.
//!
//! `cargo run --example decompositions -- ["query text"]`

use cqenum::cq::Cq;
use cqenum::decomp::{build_join_tree, enumerate_fc_tds, is_free_connex, validate_td, DEFAULT_VAR_CAP};
use cqenum::fixtures::FOUR_CYCLE_PROJECTED;

/// Returns how many decompositions were found.
pub fn run_example(text: &str) -> cqenum::Result<usize> {
    let phi = Cq::parse(text)?;
    println!("query: {phi}");
    let tds = enumerate_fc_tds(&phi, DEFAULT_VAR_CAP)?;
    println!("{} free-connex decompositions", tds.len());
    for (i, td) in tds.iter().enumerate() {
        let check = validate_td(&phi, td);
        let connex = is_free_connex(&phi, td)?;
        println!("-- td {i}: {check}, connex nodes {:?}", connex.unwrap_or_default());
        print!("{}", td.to_text(&phi));
    }

    let path = Cq::parse("exists y . R(x,y), S(y,z), T(z)")?;
    let jt = build_join_tree(&path)?;
    println!("join tree of {path}: root {}, parents {:?}", jt.root, jt.parent);
    Ok(tds.len())
}

fn main() -> cqenum::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| FOUR_CYCLE_PROJECTED.to_string());
    run_example(&text)?;
    Ok(())
}
