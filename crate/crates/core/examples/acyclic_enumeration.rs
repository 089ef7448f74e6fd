//! Constant-delay enumeration and constant-time testing for a
//! free-connex acyclic query, without any splitting.
//!
//! `cargo run --example acyclic_enumeration -- [n]`

use cqenum::cq::Cq;
use cqenum::enumerate::preprocess_acyclic;
use cqenum::oracle::brute_eval;
use cqenum::relmodel::{Signature, Structure};

/// A path `R(x,y), S(y,z)` plus a filter `T(z)` on an `n`-element chain.
fn chain(n: usize) -> Structure {
    let mut sig = Signature::new();
    sig.add("R", 2).unwrap();
    sig.add("S", 2).unwrap();
    sig.add("T", 1).unwrap();
    let mut b = Structure::builder(sig);
    for i in 0..n {
        let (u, v) = (i.to_string(), ((i + 1) % n).to_string());
        b.insert("R", &[&u, &v]).unwrap();
        b.insert("S", &[&u, &v]).unwrap();
        b.insert("S", &[&u, &u]).unwrap();
        if i % 3 != 0 {
            b.insert("T", &[&u]).unwrap();
        }
    }
    b.finish()
}

/// Returns the number of answers.
pub fn run_example(n: usize) -> cqenum::Result<usize> {
    let psi = Cq::parse("exists z . R(x,y), S(y,z), T(z)")?;
    let a = chain(n);
    let idx = preprocess_acyclic(&psi, &a)?;

    let mut it = idx.enumerate();
    let (mut count, mut last, mut worst) = (0usize, 0u64, 0u64);
    while let Some(row) = it.next() {
        if count < 5 {
            let names: Vec<&str> = row.iter().map(|&v| a.domain().name(v)).collect();
            println!("  ({})", names.join(", "));
        }
        count += 1;
        worst = worst.max(it.steps() - last);
        last = it.steps();
    }
    println!("{count} answers, max delay {worst} steps");

    let truth = brute_eval(&psi, &a)?;
    assert_eq!(truth.len(), count);
    let probe = vec![a.domain().id("1").unwrap(), a.domain().id("2").unwrap()];
    let mut steps = 0;
    let hit = idx.test_counted(&probe, &mut steps)?;
    println!("test (1, 2) = {hit} in {steps} steps, oracle says {}", truth.contains(&probe));
    Ok(count)
}

fn main() -> cqenum::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    run_example(n)?;
    Ok(())
}
