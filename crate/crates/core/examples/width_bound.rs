//! Shows what happens when the width bound `w` is below what the query
//! needs: preprocessing stops with `WidthExceeded` and reports the best
//! cost it could reach.
//!
//! `cargo run --release --example width_bound -- [ell] [w]`

use std::sync::Arc;

use cqenum::cq::Cq;
use cqenum::fixtures::{four_cycle_instance, FOUR_CYCLE_PROJECTED};
use cqenum::pipeline::{preprocess, PipelineParams};
use cqenum::Error;

/// Returns the best reachable cost when `w` is too small, `None` otherwise.
pub fn run_example(ell: usize, w: f64) -> cqenum::Result<Option<f64>> {
    let phi = Cq::parse(FOUR_CYCLE_PROJECTED)?;
    let a = Arc::new(four_cycle_instance(ell));
    match preprocess(&phi, &a, &PipelineParams::new(w, 0.5)?) {
        Ok(qi) => {
            println!("w = {w} suffices: {} parts", qi.parts().len());
            Ok(None)
        }
        Err(Error::WidthExceeded { refinement, w, best }) => {
            println!("w = {w} is too small for refinement {refinement}; best cost {best:.4}");
            Ok(Some(best))
        }
        Err(e) => Err(e),
    }
}

fn main() -> cqenum::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ell = args.first().and_then(|s| s.parse().ok()).unwrap_or(64);
    let w = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.2);
    run_example(ell, w)?;
    run_example(ell, 2.0)?;
    Ok(())
}
