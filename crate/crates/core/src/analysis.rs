//! Post-processing of trajectories and fixed points: exponential rate fits,
//! a-priori bound certificates and the spectrum of the linearized flow.

use nalgebra::DMatrix;

use crate::complex::Triangulation;
use crate::curvature::{curvature, curvature_jacobian, first_unrealizable};
use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Samples with `‖K‖_∞` below this are rounding noise and are not fitted.
pub const NOISE_FLOOR: f64 = 1e-13;
const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares fit of `ln ‖K‖_∞` against `t` over a trajectory tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Slope; `f64::NEG_INFINITY` when the curvature already vanishes in the tail.
    pub rate: f64,
    pub r_squared: f64,
    pub tail_fraction: f64,
    pub samples_used: usize,
}

impl ConvergenceReport {
    pub fn is_stationary(&self) -> bool {
        self.rate == f64::NEG_INFINITY
    }
}

pub fn fit_rate(traj: &FlowTrajectory, tail_fraction: f64) -> Result<ConvergenceReport> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let n = traj.samples.len();
    let take = ((n as f64 * tail_fraction).ceil() as usize).min(n);
    let tail = &traj.samples[n - take..];
    if tail.is_empty() {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, have: 0 });
    }
    let points: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| (s.t, s.k.max_abs()))
        .filter(|&(_, k)| k >= NOISE_FLOOR)
        .map(|(t, k)| (t, k.ln()))
        .collect();
    if points.is_empty() {
        return Ok(ConvergenceReport {
            rate: f64::NEG_INFINITY,
            r_squared: 1.0,
            tail_fraction,
            samples_used: 0,
        });
    }
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, have: points.len() });
    }
    let count = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / count;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &points {
        let (dt, dy) = (t - mean_t, y - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, have: 1 });
    }
    let rate = sty / stt;
    let r_squared = if syy == 0.0 { 1.0 } else { (sty * sty / (stt * syy)).clamp(0.0, 1.0) };
    Ok(ConvergenceReport { rate, r_squared, tail_fraction, samples_used: points.len() })
}

/// Which a-priori regime a trajectory is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Every length stays in `(0, arccosh 3)`.
    Upper,
    /// Every length stays in `(1 / (3 d_max), arccosh 3)`.
    UpperAndLower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub upper_bound: f64,
    pub lower_bound: f64,
    /// Largest length seen, and when.
    pub worst_upper: f64,
    pub worst_upper_t: f64,
    /// Smallest length seen, and when.
    pub worst_lower: f64,
    pub worst_lower_t: f64,
}

impl BoundCertificate {
    pub fn holds(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

/// Checks every recorded sample against the strict bounds for `mode`.
pub fn verify_bounds(traj: &FlowTrajectory, d_max: usize, mode: BoundMode) -> BoundCertificate {
    let upper_bound = 3f64.acosh();
    let lower_bound = match mode {
        BoundMode::Upper => 0.0,
        BoundMode::UpperAndLower => 1.0 / (3.0 * d_max as f64),
    };
    let mut cert = BoundCertificate {
        upper_ok: true,
        lower_ok: true,
        upper_bound,
        lower_bound,
        worst_upper: f64::NEG_INFINITY,
        worst_upper_t: f64::NAN,
        worst_lower: f64::INFINITY,
        worst_lower_t: f64::NAN,
    };
    for s in &traj.samples {
        for &l in s.l.iter() {
            if l > cert.worst_upper {
                cert.worst_upper = l;
                cert.worst_upper_t = s.t;
            }
            if l < cert.worst_lower {
                cert.worst_lower = l;
                cert.worst_lower_t = s.t;
            }
        }
    }
    cert.upper_ok = cert.worst_upper < upper_bound;
    cert.lower_ok = cert.worst_lower > lower_bound;
    cert
}

/// Eigenvalues of the linearized flow at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub stable: bool,
    /// Finite-difference asymmetry of the Jacobian before symmetrization.
    pub asymmetry: f64,
    /// Trace of the scaled symmetric matrix that was diagonalized.
    pub trace: f64,
}

/// Spectrum of `diag(√l) J diag(√l)` for a symmetric `J`; it has the same
/// inertia as `diag(l) J`, the Jacobian of the flow.
pub fn scaled_spectrum(jacobian: &DMatrix<f64>, l: &[f64]) -> (Vec<f64>, f64) {
    let root: Vec<f64> = l.iter().map(|v| v.sqrt()).collect();
    let scaled = DMatrix::from_fn(l.len(), l.len(), |i, j| root[i] * jacobian[(i, j)] * root[j]);
    let trace = scaled.trace();
    (jacobi_eigenvalues(scaled, 1e-12), trace)
}

/// Stability of the flow at a zero-curvature realizable metric.
pub fn spectral_check(t: &Triangulation, l_star: &[f64]) -> Result<SpectralReport> {
    if let Some(tet) = first_unrealizable(t, l_star)? {
        return Err(Error::NotRealizable { tet });
    }
    let residual = curvature(t, l_star)?.max_abs();
    if !(residual < 1e-8) {
        return Err(Error::Precondition(format!(
            "spectral check needs a fixed point, but ‖K‖_∞ = {residual:e}"
        )));
    }
    let jac = curvature_jacobian(t, l_star)?;
    let (eigenvalues, trace) = scaled_spectrum(&jac.symmetric, l_star);
    let stable = eigenvalues.iter().all(|&e| e < 0.0);
    Ok(SpectralReport { eigenvalues, stable, asymmetry: jac.asymmetry, trace })
}

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// Frobenius norm drops below `tol * max(1, ‖A‖_F)`. Returns sorted eigenvalues.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>, tol: f64) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "Jacobi rotations need a square matrix");
    let scale = a.norm().max(1.0);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off < tol * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{CurvatureVector, MetricVector};
    use crate::flow::{FlowStatus, Sample};
    use proptest::prelude::*;

    fn synthetic(points: &[(f64, f64, f64)]) -> FlowTrajectory {
        FlowTrajectory {
            samples: points
                .iter()
                .map(|&(t, l, k)| Sample { t, l: MetricVector(vec![l]), k: CurvatureVector(vec![k]), h: 0.0 })
                .collect(),
            status: FlowStatus::Converged,
            steps: points.len(),
        }
    }

    #[test]
    fn recovers_an_exact_exponential() {
        let pts: Vec<_> =
            (0..40).map(|i| (i as f64 * 0.5, 0.6, 2.0 * (-0.8 * i as f64 * 0.5).exp())).collect();
        let fit = fit_rate(&synthetic(&pts), 0.5).unwrap();
        assert!((fit.rate + 0.8).abs() < 1e-12);
        assert!(fit.r_squared > 0.999_999);
        assert_eq!(fit.samples_used, 20);
    }

    #[test]
    fn stationary_tail_is_marked() {
        let pts: Vec<_> = (0..20).map(|i| (i as f64, 0.6, 1e-16)).collect();
        let fit = fit_rate(&synthetic(&pts), 0.5).unwrap();
        assert!(fit.is_stationary());
    }

    #[test]
    fn bad_arguments() {
        let pts: Vec<_> = (0..20).map(|i| (i as f64, 0.6, 1.0)).collect();
        let traj = synthetic(&pts);
        assert!(matches!(fit_rate(&traj, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit_rate(&traj, 1.5), Err(Error::InvalidArgument(_))));
        let short = synthetic(&pts[..6]);
        assert!(matches!(fit_rate(&short, 1.0), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn bound_violation_is_flagged() {
        let traj = synthetic(&[(0.0, 0.5, 1.0), (1.0, 1.8, 1.0), (2.0, 0.9, 1.0)]);
        let cert = verify_bounds(&traj, 12, BoundMode::Upper);
        assert!(!cert.upper_ok && cert.lower_ok);
        assert_eq!((cert.worst_upper, cert.worst_upper_t), (1.8, 1.0));
        let cert = verify_bounds(&synthetic(&[(0.0, 0.02, 1.0)]), 12, BoundMode::UpperAndLower);
        assert!(cert.upper_ok && !cert.lower_ok);
        assert_eq!(cert.lower_bound, 1.0 / 36.0);
    }

    #[test]
    fn negative_identity_spectrum() {
        let (eig, trace) = scaled_spectrum(&-DMatrix::<f64>::identity(4, 4), &[1.0; 4]);
        assert_eq!(eig, vec![-1.0; 4]);
        assert_eq!(trace, -4.0);
    }

    #[test]
    fn spectral_check_needs_a_fixed_point() {
        let t = Triangulation::from_edge_labels(vec![[0; 6], [0; 6]]).unwrap();
        assert!(matches!(spectral_check(&t, &[0.9]), Err(Error::Precondition(_))));
    }

    proptest! {
        #[test]
        fn jacobi_matches_library_eigensolver(entries in proptest::collection::vec(-5.0f64..5.0, 25)) {
            let m = DMatrix::from_vec(5, 5, entries);
            let sym = (&m + m.transpose()) * 0.5;
            let ours = jacobi_eigenvalues(sym.clone(), 1e-12);
            let mut theirs: Vec<f64> = sym.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            prop_assert!((ours.iter().sum::<f64>() - sym.trace()).abs() < 1e-10);
        }

        #[test]
        fn fit_is_invariant_under_time_shift(shift in -100.0f64..100.0, rate in 0.05f64..3.0) {
            let pts: Vec<_> = (0..30).map(|i| (i as f64 * 0.3, 0.6, (-rate * i as f64 * 0.3).exp() + 1e-3 * (i as f64).sin())).collect();
            let shifted: Vec<_> = pts.iter().map(|&(t, l, k)| (t + shift, l, k)).collect();
            let a = fit_rate(&synthetic(&pts), 0.5).unwrap();
            let b = fit_rate(&synthetic(&shifted), 0.5).unwrap();
            prop_assert!((a.rate - b.rate).abs() < 1e-8 * a.rate.abs().max(1.0));
            prop_assert!((a.r_squared - b.r_squared).abs() < 1e-8);
        }
    }
}
