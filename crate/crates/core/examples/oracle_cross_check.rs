//! Compares the pipeline with brute-force evaluation on random
//! structures, for answers and for membership tests.
//!
//! `cargo run --release --example oracle_cross_check -- [trials] [seed]`

use std::collections::BTreeSet;
use std::sync::Arc;

use cqenum::cq::Cq;
use cqenum::oracle::brute_eval;
use cqenum::pipeline::{preprocess, PipelineParams};
use cqenum::relmodel::{Signature, Structure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const QUERIES: &[&str] = &[
    "E(x,y), E(y,z), E(x,z)",
    "exists y . E(x,y), F(y,z)",
    "exists x1 x3 . E(x1,x2), F(x2,x3), E(x3,x4), F(x4,x1)",
    "E(x,y), F(y,z), E(z,w)",
];

fn random_structure(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Structure {
    let mut sig = Signature::new();
    sig.add("E", 2).unwrap();
    sig.add("F", 2).unwrap();
    let mut b = Structure::builder(sig);
    for u in 0..n {
        b.element(&u.to_string());
    }
    for rel in ["E", "F"] {
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(density) {
                    b.insert(rel, &[u.to_string(), v.to_string()]).unwrap();
                }
            }
        }
    }
    b.finish()
}

/// Returns the number of (query, structure) pairs checked.
pub fn run_example(trials: usize, seed: u64) -> cqenum::Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PipelineParams::new(1.5, 0.5)?;
    let mut checked = 0;
    for t in 0..trials {
        let a = Arc::new(random_structure(&mut rng, 5, 0.35));
        for text in QUERIES {
            let phi = Cq::parse(text)?;
            let truth = brute_eval(&phi, &a)?;
            let qi = preprocess(&phi, &a, &params)?;
            let got: BTreeSet<_> = qi.enumerate().collect();
            assert_eq!(got, truth.rows, "answers differ on trial {t} for {text}");
            let k = phi.free().len();
            for _ in 0..20 {
                let row: Vec<u32> = (0..k).map(|_| rng.gen_range(0..5)).collect();
                assert_eq!(qi.test(&row)?, truth.contains(&row));
            }
            checked += 1;
        }
    }
    println!("{checked} query/structure pairs agree with brute force");
    Ok(checked)
}

fn main() -> cqenum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials = args.first().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    run_example(trials, seed)?;
    Ok(())
}
