//! Generators for the instances used throughout tests, examples and the
//! `bench` command.

use crate::relmodel::{Signature, Structure};

/// The quantifier-free 4-cycle query.
pub const FOUR_CYCLE: &str = "E12(x1,x2), E23(x2,x3), E34(x3,x4), E41(x4,x1)";
/// The 4-cycle with `x1` and `x3` projected away.
pub const FOUR_CYCLE_PROJECTED: &str =
    "exists x1 x3 . E12(x1,x2), E23(x2,x3), E34(x3,x4), E41(x4,x1)";
pub const TRIANGLE: &str = "E(x,y), E(y,z), E(x,z)";

fn four_cycle_signature() -> Signature {
    let mut sig = Signature::new();
    for name in ["E12", "E23", "E34", "E41"] {
        sig.add(name, 2).unwrap();
    }
    sig
}

/// Worst-case instance for the 4-cycle:
/// `E12 = E34 = [ℓ]×{a} ∪ {b}×[ℓ]` and `E23 = E41 = [ℓ]×{b} ∪ {a}×[ℓ]`.
/// Elements of `[ℓ]` are named `1..=ℓ`.
pub fn four_cycle_instance(ell: usize) -> Structure {
    let mut b = Structure::builder(four_cycle_signature());
    for i in 1..=ell {
        b.element(&i.to_string());
    }
    b.element("a");
    b.element("b");
    for i in 1..=ell {
        let i = i.to_string();
        for (rel, hub, spoke) in [("E12", "a", "b"), ("E34", "a", "b"), ("E23", "b", "a"), ("E41", "b", "a")] {
            b.insert(rel, &[i.as_str(), hub]).unwrap();
            b.insert(rel, &[spoke, i.as_str()]).unwrap();
        }
    }
    b.finish()
}

/// A single binary relation `E` holding the complete loopless digraph on
/// `k` vertices.
pub fn complete_digraph(k: usize) -> Structure {
    let mut sig = Signature::new();
    sig.add("E", 2).unwrap();
    let mut b = Structure::builder(sig);
    for u in 1..=k {
        for v in 1..=k {
            if u != v {
                b.insert("E", &[u.to_string(), v.to_string()]).unwrap();
            }
        }
    }
    b.finish()
}
