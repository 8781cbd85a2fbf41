//! Geometry of a single generalized hyper-ideal tetrahedron.
//!
//! Edges are indexed 0..6 as (e12, e13, e14, e34, e24, e23), so edge `i` and
//! edge `(i + 3) % 6` are opposite. Vertices are 0..4; [`EDGE_VERTICES`] gives
//! the endpoints of each edge.
//!
//! The dihedral cosine of edge 0 in terms of `x_i = cosh l_i` is
//!
//! ```text
//!        x2 x3 + x5 x6 + x1 x2 x5 + x1 x3 x6 - x1^2 x4 + x4
//! phi = -----------------------------------------------------------------
//!       sqrt(2 x1 x2 x6 + x1^2 + x2^2 + x6^2 - 1) sqrt(2 x1 x3 x5 + x1^2 + x3^2 + x5^2 - 1)
//! ```
//!
//! (1-based subscripts), and the extended dihedral angle is
//! `arccos(clamp(phi, -1, 1))`. Other edges reuse the same expression after
//! relabeling through [`PHI_PERMUTATION`].

mod covolume;
mod lobachevsky;

pub use covolume::{covolume_at_origin, line_integral, tetra_covolume, CovolumeQuadrature};
pub use lobachevsky::lobachevsky;

use crate::error::{Error, Result};

/// Endpoints of each local edge, in the (e12, e13, e14, e34, e24, e23) order.
pub const EDGE_VERTICES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (1, 3), (1, 2)];

/// `PHI_PERMUTATION[e]` lists which local edges play the roles of
/// (e1, e2, ..., e6) when edge `e` is moved into the e1 slot. For edge `{i,j}`
/// with remaining vertices `k < h` the row is `(ij, ik, ih, kh, jh, jk)`.
pub const PHI_PERMUTATION: [[usize; 6]; 6] = [
    [0, 1, 2, 3, 4, 5],
    [1, 0, 2, 4, 3, 5],
    [2, 0, 1, 5, 3, 4],
    [3, 1, 5, 0, 4, 2],
    [4, 0, 5, 1, 3, 2],
    [5, 0, 4, 2, 3, 1],
];

/// Local edge index joining vertices `u` and `v`.
pub fn edge_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (2, 3) => 3,
        (1, 3) => 4,
        (1, 2) => 5,
        _ => panic!("no edge between vertices {u} and {v}"),
    }
}

/// Six edge lengths of one tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLengths6(pub [f64; 6]);

impl EdgeLengths6 {
    pub fn uniform(l: f64) -> Self {
        Self([l; 6])
    }

    /// Negative entries clamped to zero.
    pub fn positive_part(&self) -> Self {
        Self(self.0.map(|l| l.max(0.0)))
    }

    pub fn cosh(&self) -> CoshVector6 {
        CoshVector6(self.positive_part().0.map(f64::cosh))
    }

    fn require_positive(&self) -> Result<()> {
        match self.0.iter().position(|&l| !(l > 0.0)) {
            Some(i) => Err(Error::Domain(format!("edge {i} has non-positive length {}", self.0[i]))),
            None => Ok(()),
        }
    }
}

/// `x_i = cosh(l_i^+)`; every entry is at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoshVector6(pub [f64; 6]);

impl CoshVector6 {
    /// Reorders coordinates so that `edge` sits in the e1 slot.
    pub fn relabel_for(&self, edge: usize) -> Self {
        Self(PHI_PERMUTATION[edge].map(|k| self.0[k]))
    }
}

/// Extended dihedral angles in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralAngles6(pub [f64; 6]);

/// The four closed-form partials of phi at edge 0, with respect to
/// x2, x3, x5 and x6 (1-based), and their positive prefactors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiPartials {
    pub d2: f64,
    pub d3: f64,
    pub d5: f64,
    pub d6: f64,
    pub a0: f64,
    pub a1: f64,
}

impl PhiPartials {
    /// Partial with respect to the 1-based coordinate `i` in {2, 3, 5, 6}.
    pub fn get(&self, i: usize) -> f64 {
        match i {
            2 => self.d2,
            3 => self.d3,
            5 => self.d5,
            6 => self.d6,
            _ => panic!("no closed-form partial for coordinate {i}"),
        }
    }
}

/// phi for edge 0 in the fixed coordinates.
fn phi_edge0(x: &[f64; 6]) -> f64 {
    let [x1, x2, x3, x4, x5, x6] = *x;
    if x1 == 1.0 {
        // numerator and denominator both reduce to (x2 + x6)(x3 + x5)
        return 1.0;
    }
    let num = x2 * x3 + x5 * x6 + x1 * x2 * x5 + x1 * x3 * x6 - x1 * x1 * x4 + x4;
    let r1 = 2.0 * x1 * x2 * x6 + x1 * x1 + x2 * x2 + x6 * x6 - 1.0;
    let r2 = 2.0 * x1 * x3 * x5 + x1 * x1 + x3 * x3 + x5 * x5 - 1.0;
    num / (r1.sqrt() * r2.sqrt())
}

/// Unclamped dihedral cosine at `edge`.
pub fn phi(x: &CoshVector6, edge: usize) -> f64 {
    phi_edge0(&x.relabel_for(edge).0)
}

/// All six unclamped dihedral cosines.
pub fn phi_all(x: &CoshVector6) -> [f64; 6] {
    std::array::from_fn(|e| phi(x, e))
}

/// Dihedral cosine of edge `{i, j}` written directly in vertex labels, using
/// `c_uv = cosh l_uv` and `s_uv^2 = c_uv^2 - 1`. Independent of the
/// permutation table; used to cross-check it.
pub fn phi_by_vertices(l: &EdgeLengths6, i: usize, j: usize) -> f64 {
    let c = |u: usize, v: usize| l.0[edge_index(u, v)].max(0.0).cosh();
    let mut rest = (0..4).filter(|&v| v != i && v != j);
    let (k, h) = (rest.next().unwrap(), rest.next().unwrap());
    let (cij, cik, cih, cjk, cjh, ckh) = (c(i, j), c(i, k), c(i, h), c(j, k), c(j, h), c(k, h));
    let num = cik * cih + cjk * cjh + cij * cik * cjh + cij * cih * cjk - (cij * cij - 1.0) * ckh;
    let d1 = 2.0 * cij * cik * cjk + cij * cij + cik * cik + cjk * cjk - 1.0;
    let d2 = 2.0 * cij * cih * cjh + cij * cij + cih * cih + cjh * cjh - 1.0;
    num / (d1.sqrt() * d2.sqrt())
}

/// Extended dihedral angles; negative lengths are treated as zero.
pub fn extended_dihedral_angles(l: &EdgeLengths6) -> DihedralAngles6 {
    let x = l.cosh();
    DihedralAngles6(phi_all(&x).map(|p| p.clamp(-1.0, 1.0).acos()))
}

/// Length of the vertex edge cut out on the truncation triangle at `apex`
/// by the face through `apex`, `j` and `k`.
pub fn vertex_edge_length(l: &EdgeLengths6, apex: usize, j: usize, k: usize) -> Result<f64> {
    l.require_positive()?;
    let len = |u, v| l.0[edge_index(u, v)];
    let (lij, lik, ljk) = (len(apex, j), len(apex, k), len(j, k));
    let arg = (lij.cosh() * lik.cosh() + ljk.cosh()) / (lij.sinh() * lik.sinh());
    if !(arg > 1.0) {
        return Err(Error::Domain(format!("vertex edge argument {arg} is not above 1")));
    }
    Ok(arg.acosh())
}

/// Dihedral cosine at edge `{i, j}` from the hyperbolic law of cosines in the
/// truncation triangle at `i`.
pub fn phi_via_vertex_triangle(l: &EdgeLengths6, i: usize, j: usize) -> Result<f64> {
    let mut rest = (0..4).filter(|&v| v != i && v != j);
    let (k, h) = (rest.next().unwrap(), rest.next().unwrap());
    let side_jk = vertex_edge_length(l, i, j, k)?;
    let side_jh = vertex_edge_length(l, i, j, h)?;
    let side_kh = vertex_edge_length(l, i, k, h)?;
    Ok((side_jk.cosh() * side_jh.cosh() - side_kh.cosh()) / (side_jk.sinh() * side_jh.sinh()))
}

/// Closed-form partials of phi at edge 0.
pub fn phi_partials(x: &CoshVector6) -> PhiPartials {
    let [x1, x2, x3, x4, x5, x6] = x.0;
    if x1 == 1.0 {
        return PhiPartials { d2: 0.0, d3: 0.0, d5: 0.0, d6: 0.0, a0: 0.0, a1: 0.0 };
    }
    let r1 = 2.0 * x1 * x2 * x6 + x1 * x1 + x2 * x2 + x6 * x6 - 1.0;
    let r2 = 2.0 * x1 * x3 * x5 + x1 * x1 + x3 * x3 + x5 * x5 - 1.0;
    let lead = x1 * x1 - 1.0;
    let a0 = lead / (r1 * r1.sqrt() * r2.sqrt());
    let a1 = lead / (r1.sqrt() * r2 * r2.sqrt());
    let plus = x1 * x4 + x2 * x5 - x3 * x6;
    let minus = x1 * x4 - x2 * x5 + x3 * x6;
    PhiPartials {
        d2: a0 * (plus * x6 + x3 + x1 * x5 + x2 * x4),
        d5: a1 * (plus * x3 + x6 + x1 * x2 + x5 * x4),
        d3: a1 * (minus * x5 + x2 + x1 * x6 + x3 * x4),
        d6: a0 * (minus * x2 + x5 + x1 * x3 + x6 * x4),
        a0,
        a1,
    }
}

/// Upper bound for phi at edge 0 over all x whose other coordinates lie in [1, a].
pub fn corner_bound(x1: f64, a: f64) -> f64 {
    let corners = [[x1, a, a, 1.0, a, a], [x1, a, 1.0, 1.0, a, 1.0], [x1, a, a, 1.0, a, 1.0]];
    corners.iter().map(phi_edge0).fold(f64::NEG_INFINITY, f64::max)
}

/// True iff every dihedral cosine lies strictly inside (-1, 1).
pub fn is_realizable(l: &EdgeLengths6) -> Result<bool> {
    l.require_positive()?;
    Ok(phi_all(&l.cosh()).iter().all(|&p| p > -1.0 && p < 1.0))
}
