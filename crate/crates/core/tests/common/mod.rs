//! Random instances shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cqenum::consistency::Refinement;
use cqenum::cq::Cq;
use cqenum::relmodel::{Row, Signature, Structure};
use cqenum::varset::VarSet;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const BINARY: &[(&str, usize)] = &[("E", 2), ("F", 2)];
pub const MIXED: &[(&str, usize)] = &[("E", 2), ("F", 2), ("T", 3), ("U", 1)];

/// Every element `0..n` is in the domain; each tuple is kept with
/// probability `density`.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, rels: &[(&str, usize)], density: f64) -> Structure {
    let mut sig = Signature::new();
    for &(name, arity) in rels {
        sig.add(name, arity).unwrap();
    }
    let mut b = Structure::builder(sig);
    for v in 0..n {
        b.element(&v.to_string());
    }
    for &(name, arity) in rels {
        let total = n.pow(arity as u32);
        for code in 0..total {
            if !rng.gen_bool(density) {
                continue;
            }
            let mut c = code;
            let fields: Vec<String> = (0..arity)
                .map(|_| {
                    let f = c % n;
                    c /= n;
                    f.to_string()
                })
                .collect();
            b.insert(name, &fields).unwrap();
        }
    }
    b.finish()
}

/// A connected-or-not query over `k` variables using `atoms` atoms.
/// Each variable is quantified with probability `quantify`.
pub fn random_query(rng: &mut ChaCha8Rng, k: usize, atoms: usize, rels: &[(&str, usize)], quantify: f64) -> Cq {
    let names: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
    let mut parts = Vec::new();
    let mut used = BTreeSet::new();
    for i in 0..atoms.max(1) {
        let &(rel, arity) = rels.choose(rng).unwrap();
        let args: Vec<usize> = (0..arity)
            .map(|j| {
                // Make sure every variable shows up at least once.
                if i * 2 + j < k && rng.gen_bool(0.8) {
                    i * 2 + j
                } else {
                    rng.gen_range(0..k)
                }
            })
            .collect();
        used.extend(args.iter().copied());
        let args: Vec<&str> = args.iter().map(|&a| names[a].as_str()).collect();
        parts.push(format!("{rel}({})", args.join(",")));
    }
    let quantified: Vec<&str> = used
        .iter()
        .filter(|_| rng.gen_bool(quantify))
        .map(|&v| names[v].as_str())
        .collect();
    let body = parts.join(", ");
    let text = if quantified.is_empty() {
        body
    } else {
        format!("exists {} . {body}", quantified.join(" "))
    };
    Cq::parse(&text).unwrap()
}

/// Downward closure of a few random subsets of `vars`.
pub fn random_family(rng: &mut ChaCha8Rng, vars: VarSet, picks: usize) -> Vec<VarSet> {
    let all: Vec<VarSet> = vars.subsets().collect();
    let mut family = BTreeSet::new();
    for _ in 0..picks {
        let s = *all.choose(rng).unwrap();
        family.extend(s.subsets().map(|t| t.bits()));
    }
    family.insert(0);
    family.into_iter().map(VarSet::from_bits).collect()
}

/// Drops each row of each table with probability `p`, keeping the family.
pub fn thin(rng: &mut ChaCha8Rng, r: &Refinement, p: f64) -> Refinement {
    let tables: Vec<_> = r
        .tables()
        .map(|(s, t)| (s, t.iter().filter(|_| !rng.gen_bool(p)).cloned().collect()))
        .collect();
    Refinement::with_tables(r.query().clone(), r.structure().clone(), tables).unwrap()
}

pub fn answer_set(r: &Refinement) -> BTreeSet<Row> {
    r.answers().into_iter().collect()
}
