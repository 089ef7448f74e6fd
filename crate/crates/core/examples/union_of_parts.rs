//! Enumerates the union of several answer sets without repetition and
//! without buffering: each part is listed in turn, and answers already
//! owned by a later part are skipped by a membership test.
//!
//! `cargo run --example union_of_parts -- [ell]`

use std::collections::HashSet;
use std::sync::Arc;

use cqenum::cq::Cq;
use cqenum::enumerate::union_enumerate;
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE_PROJECTED};
use cqenum::pipeline::{preprocess, PipelineParams};

/// Returns (sum of part sizes, size of the union).
pub fn run_example(ell: usize) -> cqenum::Result<(usize, usize)> {
    let phi = Cq::parse(FOUR_CYCLE_PROJECTED)?;
    let a = Arc::new(four_cycle_instance(ell));
    let qi = preprocess(&phi, &a, &PipelineParams::new(1.5, 0.5)?)?;

    let mut total = 0;
    for (i, idx) in qi.indexes().iter().enumerate() {
        let n = idx.enumerate().count();
        println!("part {i}: {n} answers");
        total += n;
    }

    let mut seen = HashSet::new();
    let mut it = union_enumerate(qi.indexes())?;
    let (mut last, mut worst) = (0, 0);
    while let Some(row) = it.next() {
        assert!(seen.insert(row), "duplicate answer");
        worst = worst.max(it.steps() - last);
        last = it.steps();
    }
    println!("union: {} answers, max delay {worst} steps", seen.len());
    Ok((total, seen.len()))
}

fn main() -> cqenum::Result<()> {
    let ell = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    run_example(ell)?;
    Ok(())
}
