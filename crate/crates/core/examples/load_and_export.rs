//! Writes a structure as a directory of tab-separated files, loads it
//! back through its manifest and answers a query on the loaded copy.
//!
//! `cargo run --example load_and_export -- [dir]`

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cqenum::cq::Cq;
use cqenum::fixtures::{complete_digraph, TRIANGLE};
use cqenum::pipeline::{preprocess, PipelineParams};
use cqenum::relmodel::Structure;

/// Returns the number of triangles found in the reloaded structure.
pub fn run_example(dir: &Path) -> cqenum::Result<usize> {
    let original = complete_digraph(5);
    original.export(dir)?;
    println!("wrote {}", dir.display());

    let loaded = Structure::load_with_manifest(dir, &dir.join("manifest.txt"), '\t')?;
    let stats = loaded.stats();
    println!("loaded: n = {}, m = {}, size = {}", stats.n, stats.m, stats.size);

    let phi = Cq::parse(TRIANGLE)?;
    let qi = preprocess(&phi, &Arc::new(loaded), &PipelineParams::new(1.5, 0.5)?)?;
    let count = qi.enumerate().count();
    println!("{phi}: {count} answers");
    Ok(count)
}

fn main() -> cqenum::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("cqenum-k5"));
    run_example(&dir)?;
    Ok(())
}
