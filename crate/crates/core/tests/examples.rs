//! Every example runs to completion on small inputs.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;
    };
}

example!(parse_and_project, "../examples/parse_and_project.rs");
example!(decompositions, "../examples/decompositions.rs");
example!(strong_consistency, "../examples/strong_consistency.rs");
example!(uniform_split, "../examples/uniform_split.rs");
example!(acyclic_enumeration, "../examples/acyclic_enumeration.rs");
example!(union_of_parts, "../examples/union_of_parts.rs");
example!(oracle_cross_check, "../examples/oracle_cross_check.rs");
example!(load_and_export, "../examples/load_and_export.rs");
example!(width_bound, "../examples/width_bound.rs");
example!(four_cycle_worst_case, "../examples/four_cycle_worst_case.rs");

#[test]
fn parse_and_project_sizes() {
    // Cut to {x1,x3}, each atom only says x1 (resp. x3) lies in [ℓ] ∪ {b}.
    let (x13, x24) = parse_and_project::run_example(4).unwrap();
    assert_eq!(x13, 25);
    assert_eq!(x24, 25);
}

#[test]
fn decompositions_of_projected_cycle() {
    assert_eq!(decompositions::run_example(cqenum::fixtures::FOUR_CYCLE_PROJECTED).unwrap(), 1);
}

#[test]
fn strong_consistency_full_family() {
    assert_eq!(strong_consistency::run_example(4, None).unwrap(), 16);
}

#[test]
fn uniform_split_width() {
    let (parts, width) = uniform_split::run_example(8, 2.25).unwrap();
    assert!(parts >= 1);
    assert!(width <= 1.5 + 1e-9);
}

#[test]
fn acyclic_enumeration_chain() {
    assert_eq!(acyclic_enumeration::run_example(12).unwrap(), 12);
}

#[test]
fn union_of_parts_is_duplicate_free() {
    let (total, union) = union_of_parts::run_example(8).unwrap();
    assert!(union <= total);
    assert_eq!(union, 65);
}

#[test]
fn oracle_cross_check_small() {
    assert_eq!(oracle_cross_check::run_example(3, 11).unwrap(), 12);
}

#[test]
fn load_and_export_round_trip() {
    let dir = std::env::temp_dir().join(format!("cqenum-example-{}", std::process::id()));
    assert_eq!(load_and_export::run_example(&dir).unwrap(), 60);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn width_bound_reports_best() {
    let best = width_bound::run_example(16, 1.2).unwrap().expect("w = 1.2 is too small");
    assert!(best > 1.2);
    assert!(width_bound::run_example(16, 2.0).unwrap().is_none());
}

#[test]
fn four_cycle_worst_case_counts() {
    // Full query: x1 = x3 = b or x2 = x4 = a, 2ℓ² answers.
    // Projected: every (i, j), via x1 = x3 = b, plus (a, a).
    assert_eq!(four_cycle_worst_case::run_example(8, 1.5, 0.5, false).unwrap(), 2 * 8 * 8);
    assert_eq!(four_cycle_worst_case::run_example(8, 2.0, 0.5, true).unwrap(), 65);
}
