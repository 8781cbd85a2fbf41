//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use hyperideal_flow::complex::{edge_classes, face_vertices, Gluing, GluingTable};

pub const SAMPLE2: &str = include_str!("../../data/sample2.ptm");

/// Catalan's constant over two from `½ Σ_{k odd} (-1)^{(k-1)/2} / k²`, with
/// Euler's transform applied as repeated averaging of the partial sums.
pub fn half_catalan() -> f64 {
    let terms = 60;
    let mut partial = Vec::with_capacity(terms);
    let mut acc = 0.0;
    for n in 0..terms {
        let k = (2 * n + 1) as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign / (k * k);
        partial.push(acc);
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    0.5 * partial[0]
}

/// A face as `(tet, face)`.
type Face = (usize, usize);

/// Every perfect matching of `items`.
fn matchings(items: &[Face]) -> Vec<Vec<(Face, Face)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for i in 1..items.len() {
        let rest: Vec<_> =
            items[1..].iter().enumerate().filter(|&(j, _)| j + 1 != i).map(|(_, &x)| x).collect();
        for mut m in matchings(&rest) {
            m.insert(0, (first, items[i]));
            out.push(m);
        }
    }
    out
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Exhaustive search over all closed gluings of two tetrahedra for those whose
/// six edges collapse to one class (necessarily of valence 12).
pub fn single_edge_two_tet_gluings() -> Vec<GluingTable> {
    let faces: Vec<(usize, usize)> = (0..2).flat_map(|t| (0..4).map(move |f| (t, f))).collect();
    let mut found = Vec::new();
    for m in matchings(&faces) {
        for choice in 0..6usize.pow(4) {
            let mut c = choice;
            let gluings: Vec<Gluing> = m
                .iter()
                .map(|&((a, f), (b, g))| {
                    let perm = PERMS3[c % 6];
                    c /= 6;
                    let target = face_vertices(g);
                    Gluing::from_face_images(a, f, b, g, perm.map(|i| target[i])).unwrap()
                })
                .collect();
            let table = GluingTable::new(2, gluings).unwrap();
            if edge_classes(&table).class_count() == 1 {
                found.push(table);
            }
        }
    }
    found
}
