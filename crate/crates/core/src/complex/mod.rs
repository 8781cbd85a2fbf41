//! Triangulations: face gluings, edge classes and the tetra-edge incidence map.

mod manifest;
mod union_find;

pub use manifest::parse_manifest;
pub use union_find::UnionFind;

use std::fmt;

use crate::error::{Error, Result};
use crate::hypertet::edge_index;

/// A permutation of the four vertices of a tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexMap(pub [usize; 4]);

impl VertexMap {
    pub const IDENTITY: VertexMap = VertexMap([0, 1, 2, 3]);

    pub fn apply(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn inverse(&self) -> VertexMap {
        let mut inv = [0; 4];
        for (v, &w) in self.0.iter().enumerate() {
            inv[w] = v;
        }
        VertexMap(inv)
    }

    pub fn compose(&self, then: &VertexMap) -> VertexMap {
        VertexMap(self.0.map(|v| then.0[v]))
    }

    fn is_permutation(&self) -> bool {
        let mut seen = [false; 4];
        self.0.iter().all(|&v| v < 4 && !std::mem::replace(&mut seen[v], true))
    }
}

/// Vertices of the face opposite `face`, increasing.
pub fn face_vertices(face: usize) -> [usize; 3] {
    let mut out = [0; 3];
    for (slot, v) in out.iter_mut().zip((0..4).filter(|&v| v != face)) {
        *slot = v;
    }
    out
}

/// Face `face` of tetrahedron `tet` is attached to face `other_face` of
/// `other_tet`; `map` carries the vertices of the first tetrahedron to the second
/// and sends `face` to `other_face`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gluing {
    pub tet: usize,
    pub face: usize,
    pub other_tet: usize,
    pub other_face: usize,
    pub map: VertexMap,
}

impl Gluing {
    /// Builds a gluing from the images of the face's vertices, listed in
    /// increasing order.
    pub fn from_face_images(
        tet: usize,
        face: usize,
        other_tet: usize,
        other_face: usize,
        images: [usize; 3],
    ) -> Result<Self> {
        if face > 3 || other_face > 3 {
            return Err(Error::Validation(format!(
                "face index out of range in gluing {tet}:{face} -> {other_tet}:{other_face}"
            )));
        }
        let mut perm = [0; 4];
        perm[face] = other_face;
        for (v, w) in face_vertices(face).into_iter().zip(images) {
            perm[v] = w;
        }
        let map = VertexMap(perm);
        if !map.is_permutation() {
            return Err(Error::Validation(format!(
                "vertex images {images:?} are not the vertices of face {other_face} of tetrahedron {other_tet}"
            )));
        }
        Ok(Self { tet, face, other_tet, other_face, map })
    }

    pub fn reversed(&self) -> Gluing {
        Gluing {
            tet: self.other_tet,
            face: self.other_face,
            other_tet: self.tet,
            other_face: self.face,
            map: self.map.inverse(),
        }
    }

    /// Images of the face vertices, in the manifest's order.
    pub fn face_images(&self) -> [usize; 3] {
        face_vertices(self.face).map(|v| self.map.apply(v))
    }
}

/// A closed, involutive set of face pairings.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingTable {
    tet_count: usize,
    gluings: Vec<Gluing>,
    /// `partner[4 * tet + face]`, filled in both directions.
    partner: Vec<Gluing>,
}

impl GluingTable {
    /// Validates that every face is paired exactly once.
    pub fn new(tet_count: usize, gluings: Vec<Gluing>) -> Result<Self> {
        if tet_count == 0 {
            return Err(Error::Validation("triangulation has no tetrahedra".into()));
        }
        let mut slots: Vec<Option<Gluing>> = vec![None; 4 * tet_count];
        for g in &gluings {
            for side in [*g, g.reversed()] {
                if side.tet >= tet_count {
                    return Err(Error::Validation(format!(
                        "tetrahedron {} out of range (have {tet_count})",
                        side.tet
                    )));
                }
            }
            if g.tet == g.other_tet && g.face == g.other_face {
                return Err(Error::Validation(format!(
                    "face {} of tetrahedron {} is glued to itself",
                    g.face, g.tet
                )));
            }
            for side in [*g, g.reversed()] {
                let slot = &mut slots[4 * side.tet + side.face];
                if slot.is_some() {
                    return Err(Error::Validation(format!(
                        "duplicated gluing: face {} of tetrahedron {} is glued twice",
                        side.face, side.tet
                    )));
                }
                *slot = Some(side);
            }
        }
        let mut partner = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(g) => partner.push(g),
                None => {
                    return Err(Error::Validation(format!(
                        "manifest not closed: face {} of tetrahedron {} is unglued",
                        i % 4,
                        i / 4
                    )))
                }
            }
        }
        Ok(Self { tet_count, gluings, partner })
    }

    pub fn tet_count(&self) -> usize {
        self.tet_count
    }

    /// The gluings as listed, one per unordered face pair.
    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    /// The gluing leaving face `face` of `tet`.
    pub fn partner(&self, tet: usize, face: usize) -> &Gluing {
        &self.partner[4 * tet + face]
    }
}

impl fmt::Display for GluingTable {
    /// Manifest text for the table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tetrahedra {}", self.tet_count)?;
        for g in &self.gluings {
            let [p0, p1, p2] = g.face_images();
            writeln!(f, "glue {} {} {} {} {} {} {}", g.tet, g.face, g.other_tet, g.other_face, p0, p1, p2)?;
        }
        Ok(())
    }
}

/// Edge classes of a triangulation and their valences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClassTable {
    class_of: Vec<[usize; 6]>,
    valence: Vec<usize>,
}

impl EdgeClassTable {
    /// Reads classes off an explicit labeling; ids must cover `0..m` without gaps.
    pub fn from_labels(labels: Vec<[usize; 6]>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("triangulation has no tetrahedra".into()));
        }
        let class_count = labels.iter().flatten().max().map_or(0, |&m| m + 1);
        let mut valence = vec![0; class_count];
        for &c in labels.iter().flatten() {
            valence[c] += 1;
        }
        if let Some(missing) = valence.iter().position(|&d| d == 0) {
            return Err(Error::Validation(format!(
                "edge class {missing} is unused; class ids must be 0..{class_count} without gaps"
            )));
        }
        Ok(Self { class_of: labels, valence })
    }

    pub fn class_count(&self) -> usize {
        self.valence.len()
    }

    pub fn tet_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn class_of(&self, tet: usize, edge: usize) -> usize {
        self.class_of[tet][edge]
    }

    /// The full incidence map, one row of six class ids per tetrahedron.
    pub fn incidence(&self) -> &[[usize; 6]] {
        &self.class_of
    }

    pub fn valences(&self) -> &[usize] {
        &self.valence
    }

    pub fn max_valence(&self) -> usize {
        self.valence.iter().copied().max().unwrap_or(0)
    }
}

/// Union-find over the `6 * tet_count` tetra-edges. Class ids follow first
/// occurrence in the (tet, local edge) scan.
pub fn edge_classes(table: &GluingTable) -> EdgeClassTable {
    let n = table.tet_count();
    let mut uf = UnionFind::new(6 * n);
    for g in table.gluings() {
        let verts = face_vertices(g.face);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let (u, v) = (verts[a], verts[b]);
            let here = 6 * g.tet + edge_index(u, v);
            let there = 6 * g.other_tet + edge_index(g.map.apply(u), g.map.apply(v));
            uf.union(here, there);
        }
    }
    let mut id_of_root = vec![usize::MAX; 6 * n];
    let mut next = 0;
    let mut class_of = vec![[0; 6]; n];
    for (tet, row) in class_of.iter_mut().enumerate() {
        for (edge, slot) in row.iter_mut().enumerate() {
            let root = uf.find(6 * tet + edge);
            if id_of_root[root] == usize::MAX {
                id_of_root[root] = next;
                next += 1;
            }
            *slot = id_of_root[root];
        }
    }
    EdgeClassTable::from_labels(class_of).expect("union-find ids are contiguous")
}

/// How the triangulation was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Combinatorics {
    Glued(GluingTable),
    Labeled,
}

/// An immutable triangulation together with its edge classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    combinatorics: Combinatorics,
    classes: EdgeClassTable,
}

impl Triangulation {
    pub fn from_gluings(table: GluingTable) -> Self {
        let classes = edge_classes(&table);
        Self { combinatorics: Combinatorics::Glued(table), classes }
    }

    pub fn from_edge_labels(labels: Vec<[usize; 6]>) -> Result<Self> {
        Ok(Self { combinatorics: Combinatorics::Labeled, classes: EdgeClassTable::from_labels(labels)? })
    }

    pub fn combinatorics(&self) -> &Combinatorics {
        &self.combinatorics
    }

    pub fn classes(&self) -> &EdgeClassTable {
        &self.classes
    }

    pub fn tet_count(&self) -> usize {
        self.classes.tet_count()
    }

    pub fn class_count(&self) -> usize {
        self.classes.class_count()
    }

    pub fn valences(&self) -> &[usize] {
        self.classes.valences()
    }

    /// Map from (tet, local edge) to edge class.
    pub fn incidence(&self) -> &[[usize; 6]] {
        self.classes.incidence()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_identity() -> GluingTable {
        let gluings = (0..4)
            .map(|f| Gluing { tet: 0, face: f, other_tet: 1, other_face: f, map: VertexMap::IDENTITY })
            .collect();
        GluingTable::new(2, gluings).unwrap()
    }

    #[test]
    fn face_vertices_skip_the_opposite_vertex() {
        assert_eq!(face_vertices(0), [1, 2, 3]);
        assert_eq!(face_vertices(2), [0, 1, 3]);
    }

    #[test]
    fn vertex_map_inverse() {
        let m = VertexMap([2, 0, 3, 1]);
        assert_eq!(m.compose(&m.inverse()), VertexMap::IDENTITY);
        assert_eq!(m.inverse().compose(&m), VertexMap::IDENTITY);
    }

    #[test]
    fn doubled_tetrahedron_has_six_edges_of_valence_two() {
        let classes = edge_classes(&double_identity());
        assert_eq!(classes.class_count(), 6);
        assert_eq!(classes.valences(), &[2; 6]);
        assert_eq!(classes.incidence()[0], classes.incidence()[1]);
        assert_eq!(classes.valences().iter().sum::<usize>(), 12);
    }

    #[test]
    fn rejects_bad_images() {
        // face 0 of a tet has vertices 1,2,3; the image must avoid other_face
        assert!(Gluing::from_face_images(0, 0, 1, 3, [0, 1, 3]).is_err());
        assert!(Gluing::from_face_images(0, 0, 1, 3, [0, 0, 2]).is_err());
        let g = Gluing::from_face_images(0, 0, 1, 3, [2, 0, 1]).unwrap();
        assert_eq!(g.map, VertexMap([3, 2, 0, 1]));
        assert_eq!(g.face_images(), [2, 0, 1]);
    }

    #[test]
    fn open_and_duplicated_tables_are_rejected() {
        let g = |f| Gluing { tet: 0, face: f, other_tet: 1, other_face: f, map: VertexMap::IDENTITY };
        let err = GluingTable::new(2, vec![g(0), g(1), g(2)]).unwrap_err();
        assert!(err.to_string().contains("manifest not closed"), "{err}");
        let err = GluingTable::new(2, vec![g(0), g(0), g(1), g(2), g(3)]).unwrap_err();
        assert!(err.to_string().contains("duplicated gluing"), "{err}");
    }

    #[test]
    fn partner_is_an_involution() {
        let table = double_identity();
        for tet in 0..2 {
            for face in 0..4 {
                let there = table.partner(tet, face);
                let back = table.partner(there.other_tet, there.other_face);
                assert_eq!((back.other_tet, back.other_face), (tet, face));
                assert_eq!(there.map.compose(&back.map), VertexMap::IDENTITY);
            }
        }
    }

    #[test]
    fn label_mode_reads_classes_directly() {
        let t = Triangulation::from_edge_labels(vec![[0; 6]]).unwrap();
        assert_eq!(t.class_count(), 1);
        assert_eq!(t.valences(), &[6]);
        let t = Triangulation::from_edge_labels(vec![[0, 1, 2, 2, 1, 0], [3, 3, 3, 0, 1, 2]]).unwrap();
        assert_eq!(t.incidence()[1], [3, 3, 3, 0, 1, 2]);
        assert_eq!(t.valences(), &[3, 3, 3, 3]);
        assert!(Triangulation::from_edge_labels(vec![[0, 2, 2, 2, 2, 2]]).is_err());
    }
}
