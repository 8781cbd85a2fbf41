//! The shipped two-tetrahedron manifest against an exhaustive search of all
//! closed two-tetrahedron gluings.

mod common;

use hyperideal_flow::complex::{edge_classes, parse_manifest, Combinatorics};

#[test]
fn shipped_sample_is_a_single_edge_complex() {
    let t = parse_manifest(common::SAMPLE2).unwrap();
    assert_eq!(t.tet_count(), 2);
    assert_eq!(t.class_count(), 1);
    assert_eq!(t.valences(), &[12]);
    assert!(t.incidence().iter().flatten().all(|&c| c == 0));
}

#[test]
fn shipped_sample_is_among_search_results() {
    let found = common::single_edge_two_tet_gluings();
    assert!(!found.is_empty());
    for table in &found {
        let classes = edge_classes(table);
        assert_eq!(classes.valences(), &[12]);
    }
    let t = parse_manifest(common::SAMPLE2).unwrap();
    let Combinatorics::Glued(shipped) = t.combinatorics() else {
        panic!("sample is in gluing mode");
    };
    assert!(found.iter().any(|g| g.gluings() == shipped.gluings()));
}

#[test]
fn parsing_is_deterministic() {
    let a = parse_manifest(common::SAMPLE2).unwrap();
    let b = parse_manifest(common::SAMPLE2).unwrap();
    assert_eq!(a, b);
}
