//! Curvature, the functional H and their derivatives on a whole triangulation.
//!
//! A metric assigns one length per edge class. Each tetrahedron sees the
//! lengths of its six edges through the incidence map, and the curvature of a
//! class is 2π minus the sum of the extended dihedral angles of its members.
//! `H(l) = Σ_tets cov(l̂) - 2π Σ_classes l` has gradient `-K`.

use std::f64::consts::TAU;
use std::ops::Deref;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::complex::Triangulation;
use crate::error::{Error, Result};
use crate::hypertet::{
    extended_dihedral_angles, is_realizable, phi_all, tetra_covolume, CovolumeQuadrature, DihedralAngles6,
    EdgeLengths6,
};

/// One length per edge class.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector(pub Vec<f64>);

impl MetricVector {
    pub fn uniform(class_count: usize, value: f64) -> Self {
        Self(vec![value; class_count])
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&l| l > 0.0)
    }
}

impl Deref for MetricVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Curvature per edge class, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector(pub Vec<f64>);

impl CurvatureVector {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, k| m.max(k.abs()))
    }
}

impl Deref for CurvatureVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Whether per-tetrahedron work may be spread over the rayon pool. Results are
/// bit-identical either way: per-tetrahedron values are collected in tetrahedron
/// order and reduced sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    #[default]
    Serial,
    Parallel,
}

impl Evaluation {
    fn per_tet<T: Send>(self, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        match self {
            Evaluation::Serial => (0..count).map(f).collect(),
            Evaluation::Parallel => (0..count).into_par_iter().map(f).collect(),
        }
    }
}

fn check_dimension(t: &Triangulation, l: &[f64]) -> Result<()> {
    if l.len() != t.class_count() {
        return Err(Error::Dimension { expected: t.class_count(), got: l.len() });
    }
    Ok(())
}

/// Lengths seen by tetrahedron `tet`.
pub fn lift(t: &Triangulation, l: &[f64], tet: usize) -> EdgeLengths6 {
    EdgeLengths6(t.incidence()[tet].map(|c| l[c]))
}

fn accumulate(t: &Triangulation, angles: &[DihedralAngles6]) -> CurvatureVector {
    let mut k = vec![TAU; t.class_count()];
    for (row, a) in t.incidence().iter().zip(angles) {
        for (&class, angle) in row.iter().zip(a.0) {
            k[class] -= angle;
        }
    }
    CurvatureVector(k)
}

fn curvature_unchecked(t: &Triangulation, l: &[f64], eval: Evaluation) -> CurvatureVector {
    let angles = eval.per_tet(t.tet_count(), |tet| extended_dihedral_angles(&lift(t, l, tet)));
    accumulate(t, &angles)
}

/// Generalized curvature; negative entries behave as zero length.
pub fn curvature(t: &Triangulation, l: &[f64]) -> Result<CurvatureVector> {
    curvature_with(t, l, Evaluation::Serial)
}

pub fn curvature_with(t: &Triangulation, l: &[f64], eval: Evaluation) -> Result<CurvatureVector> {
    check_dimension(t, l)?;
    Ok(curvature_unchecked(t, l, eval))
}

/// Sum of per-tetrahedron co-volumes at the lifted lengths.
pub fn covolume(t: &Triangulation, l: &[f64], quad: &CovolumeQuadrature, eval: Evaluation) -> Result<f64> {
    check_dimension(t, l)?;
    let parts = eval.per_tet(t.tet_count(), |tet| tetra_covolume(&lift(t, l, tet), quad));
    Ok(parts.iter().sum())
}

/// `H(l) = cov(l) - 2π Σ l`, defined for any real `l`.
pub fn functional_h(t: &Triangulation, l: &[f64]) -> Result<f64> {
    functional_h_with(t, l, &CovolumeQuadrature::default(), Evaluation::Serial)
}

pub fn functional_h_with(
    t: &Triangulation,
    l: &[f64],
    quad: &CovolumeQuadrature,
    eval: Evaluation,
) -> Result<f64> {
    Ok(covolume(t, l, quad, eval)? - TAU * l.iter().sum::<f64>())
}

/// First tetrahedron whose lifted lengths are not a genuine hyper-ideal
/// tetrahedron, if any.
pub fn first_unrealizable(t: &Triangulation, l: &[f64]) -> Result<Option<usize>> {
    check_dimension(t, l)?;
    for tet in 0..t.tet_count() {
        let lifted = lift(t, l, tet);
        if !is_realizable(&lifted)? {
            return Ok(Some(tet));
        }
    }
    Ok(None)
}

/// Per-tetrahedron realizability and the worst dihedral cosine.
#[derive(Debug, Clone, PartialEq)]
pub struct TetRealizability {
    pub tet: usize,
    pub realizable: bool,
    pub max_abs_phi: f64,
}

pub fn realizability_report(t: &Triangulation, l: &[f64]) -> Result<Vec<TetRealizability>> {
    check_dimension(t, l)?;
    (0..t.tet_count())
        .map(|tet| {
            let lifted = lift(t, l, tet);
            let realizable = is_realizable(&lifted)?;
            let max_abs_phi = phi_all(&lifted.cosh()).iter().fold(0.0f64, |m, p| m.max(p.abs()));
            Ok(TetRealizability { tet, realizable, max_abs_phi })
        })
        .collect()
}

/// Finite-difference Jacobian of the curvature map.
#[derive(Debug, Clone)]
pub struct CurvatureJacobian {
    /// `raw[(i, j)] = ∂K_i/∂l_j`.
    pub raw: DMatrix<f64>,
    /// `(raw + rawᵀ) / 2`.
    pub symmetric: DMatrix<f64>,
    /// `‖raw - rawᵀ‖_∞` (max absolute entry).
    pub asymmetry: f64,
}

/// Central differences with step `1e-5 * max(1, l_j)`. Every tetrahedron must
/// be realizable at `l`, since the clamped extension is not differentiable on
/// the boundary of that region.
pub fn curvature_jacobian(t: &Triangulation, l: &[f64]) -> Result<CurvatureJacobian> {
    check_dimension(t, l)?;
    if let Some(tet) = first_unrealizable(t, l)? {
        return Err(Error::NotRealizable { tet });
    }
    let m = l.len();
    let mut raw = DMatrix::zeros(m, m);
    let mut probe = l.to_vec();
    for j in 0..m {
        let h = 1e-5 * l[j].max(1.0);
        probe[j] = l[j] + h;
        let up = curvature_unchecked(t, &probe, Evaluation::Serial);
        probe[j] = l[j] - h;
        let dn = curvature_unchecked(t, &probe, Evaluation::Serial);
        probe[j] = l[j];
        for i in 0..m {
            raw[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    let symmetric = (&raw + raw.transpose()) * 0.5;
    let asymmetry = (&raw - raw.transpose()).amax();
    Ok(CurvatureJacobian { raw, symmetric, asymmetry })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn one_class_two_tets() -> Triangulation {
        Triangulation::from_edge_labels(vec![[0; 6], [0; 6]]).unwrap()
    }

    #[test]
    fn zero_curvature_at_closed_form_root() {
        let t = one_class_two_tets();
        let l = ((3.0 + 3f64.sqrt()) / 4.0).acosh();
        let k = curvature(&t, &[l]).unwrap();
        assert_abs_diff_eq!(k[0], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn curvature_at_arccosh_three() {
        let t = one_class_two_tets();
        let k = curvature(&t, &[3f64.acosh()]).unwrap();
        assert_abs_diff_eq!(k[0], 2.0 * PI - 12.0 * 0.6f64.acos(), epsilon = 1e-12);
        assert_abs_diff_eq!(k[0], -4.844_36, epsilon = 1e-5);
    }

    #[test]
    fn dimension_is_checked() {
        let t = one_class_two_tets();
        assert!(matches!(curvature(&t, &[0.3, 0.4]), Err(Error::Dimension { expected: 1, got: 2 })));
        assert!(matches!(functional_h(&t, &[]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn h_at_origin_is_twice_the_tetra_constant() {
        let t = one_class_two_tets();
        assert_abs_diff_eq!(functional_h(&t, &[0.0]).unwrap(), 14.655_449_506_835_504, epsilon = 1e-10);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let t = Triangulation::from_edge_labels(vec![
            [0, 1, 2, 3, 4, 5],
            [5, 4, 3, 2, 1, 0],
            [0, 0, 1, 1, 2, 2],
            [3, 4, 5, 3, 4, 5],
        ])
        .unwrap();
        let l = [0.3, 0.7, 1.1, 0.2, 1.5, 0.9];
        assert_eq!(
            curvature_with(&t, &l, Evaluation::Serial).unwrap(),
            curvature_with(&t, &l, Evaluation::Parallel).unwrap()
        );
        let q = CovolumeQuadrature::default();
        assert_eq!(
            functional_h_with(&t, &l, &q, Evaluation::Serial).unwrap().to_bits(),
            functional_h_with(&t, &l, &q, Evaluation::Parallel).unwrap().to_bits()
        );
    }

    #[test]
    fn jacobian_requires_realizability() {
        let two = Triangulation::from_edge_labels(vec![[0, 1, 1, 1, 1, 1]]).unwrap();
        assert!(matches!(curvature_jacobian(&two, &[10.0, 0.5]), Err(Error::NotRealizable { tet: 0 })));
        let t = one_class_two_tets();
        let j = curvature_jacobian(&t, &[0.6]).unwrap();
        assert!(j.raw[(0, 0)] < 0.0);
        assert_eq!(j.asymmetry, 0.0);
    }
}
