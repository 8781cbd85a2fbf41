//! Extended combinatorial Ricci flow `dl/dt = K(l) · l` and its fixed points.
//!
//! The multiplicative form keeps every length positive for the exact solution;
//! numerically a step that would make a length non-positive is retried with half
//! the step size.

use nalgebra::DVector;

use crate::analysis::{fit_rate, ConvergenceReport, DEFAULT_TAIL_FRACTION};
use crate::complex::Triangulation;
use crate::curvature::{
    curvature_jacobian, curvature_with, first_unrealizable, functional_h_with, realizability_report,
    CurvatureVector, Evaluation, MetricVector, TetRealizability,
};
use crate::error::{Error, Result};
use crate::hypertet::CovolumeQuadrature;

/// Smallest step the integrators will take before giving up.
pub const MIN_STEP: f64 = 1e-14;
const MAX_NEWTON_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Runge–Kutta–Fehlberg 4(5) with step-size control.
    Rkf45,
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowEquation {
    /// `dl/dt = K(l) · l`.
    #[default]
    Extended,
    /// `dl/dt = K(l)`; kept only to compare against the extended flow.
    Luo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub method: Method,
    /// Step for RK4; initial step for RKF45.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    /// Stop once `‖K‖_∞` drops below this.
    pub stop_tol: f64,
    /// Record every n-th accepted step (the first and last states are always kept).
    pub record_every: usize,
    pub equation: FlowEquation,
    pub evaluation: Evaluation,
    pub quadrature: CovolumeQuadrature,
    /// Residual target for the Newton polish in [`solve`].
    pub newton_tol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            method: Method::Rkf45,
            dt: 0.01,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_max: 500.0,
            stop_tol: 1e-10,
            record_every: 1,
            equation: FlowEquation::Extended,
            evaluation: Evaluation::Serial,
            quadrature: CovolumeQuadrature::default(),
            newton_tol: 1e-12,
        }
    }
}

impl FlowConfig {
    pub fn rk4(dt: f64) -> Self {
        Self { method: Method::Rk4, dt, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("stop_tol", self.stop_tol),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("newton_tol", self.newton_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded state along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub l: MetricVector,
    pub k: CurvatureVector,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowStatus {
    Converged,
    TMaxReached,
    /// Step size underflow. Solutions exist for all time, so this points at
    /// the numerics rather than the geometry.
    Diverged(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub samples: Vec<Sample>,
    pub status: FlowStatus,
    /// Accepted integration steps.
    pub steps: usize,
}

impl FlowTrajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

struct Rhs<'a> {
    t: &'a Triangulation,
    cfg: &'a FlowConfig,
}

impl Rhs<'_> {
    fn curvature(&self, l: &[f64]) -> CurvatureVector {
        curvature_with(self.t, l, self.cfg.evaluation).expect("dimension checked at entry")
    }

    fn velocity(&self, l: &[f64], k: &[f64]) -> Vec<f64> {
        match self.cfg.equation {
            FlowEquation::Extended => l.iter().zip(k).map(|(l, k)| k * l).collect(),
            FlowEquation::Luo => k.to_vec(),
        }
    }

    fn eval(&self, l: &[f64]) -> Vec<f64> {
        self.velocity(l, &self.curvature(l))
    }
}

fn axpy(y: &[f64], terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += c * x;
        }
    }
    out
}

fn rk4_step(rhs: &Rhs, y: &[f64], k1: &[f64], h: f64) -> Vec<f64> {
    let k2 = rhs.eval(&axpy(y, &[(0.5 * h, k1)]));
    let k3 = rhs.eval(&axpy(y, &[(0.5 * h, &k2)]));
    let k4 = rhs.eval(&axpy(y, &[(h, &k3)]));
    axpy(y, &[(h / 6.0, k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)])
}

/// Fehlberg 4(5) step. Returns the fifth-order solution and the error estimate.
fn rkf45_step(rhs: &Rhs, y: &[f64], k1: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let k2 = rhs.eval(&axpy(y, &[(h / 4.0, k1)]));
    let k3 = rhs.eval(&axpy(y, &[(h * 3.0 / 32.0, k1), (h * 9.0 / 32.0, &k2)]));
    let k4 = rhs.eval(&axpy(
        y,
        &[(h * 1932.0 / 2197.0, k1), (-h * 7200.0 / 2197.0, &k2), (h * 7296.0 / 2197.0, &k3)],
    ));
    let k5 = rhs.eval(&axpy(
        y,
        &[(h * 439.0 / 216.0, k1), (-h * 8.0, &k2), (h * 3680.0 / 513.0, &k3), (-h * 845.0 / 4104.0, &k4)],
    ));
    let k6 = rhs.eval(&axpy(
        y,
        &[
            (-h * 8.0 / 27.0, k1),
            (h * 2.0, &k2),
            (-h * 3544.0 / 2565.0, &k3),
            (h * 1859.0 / 4104.0, &k4),
            (-h * 11.0 / 40.0, &k5),
        ],
    ));
    let fifth = axpy(
        y,
        &[
            (h * 16.0 / 135.0, k1),
            (h * 6656.0 / 12825.0, &k3),
            (h * 28561.0 / 56430.0, &k4),
            (-h * 9.0 / 50.0, &k5),
            (h * 2.0 / 55.0, &k6),
        ],
    );
    let fourth = axpy(
        y,
        &[(h * 25.0 / 216.0, k1), (h * 1408.0 / 2565.0, &k3), (h * 2197.0 / 4104.0, &k4), (-h / 5.0, &k5)],
    );
    let err = fifth.iter().zip(&fourth).map(|(a, b)| a - b).collect();
    (fifth, err)
}

fn check_initial(t: &Triangulation, l0: &[f64]) -> Result<()> {
    if l0.len() != t.class_count() {
        return Err(Error::Dimension { expected: t.class_count(), got: l0.len() });
    }
    if let Some(i) = l0.iter().position(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "initial length of class {i} must be positive, got {}",
            l0[i]
        )));
    }
    Ok(())
}

/// Largest step keeping `h ρ` inside the real stability interval of the
/// embedded pair, with `ρ` a secant estimate of the local Lipschitz constant.
/// Near a fixed point the error estimate shrinks with the deviation, so
/// without this cap the step drifts past the stability limit and the
/// iterates hover at the tolerance level instead of converging.
fn stability_cap(y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64]) -> Option<f64> {
    const STABLE_REAL_EXTENT: f64 = 2.0;
    let dy = y0.iter().zip(y1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = y0.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    if dy <= 1e-13 * scale.max(1e-300) {
        return None;
    }
    let df = f0.iter().zip(f1).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let rho = df / dy;
    (rho > 0.0 && rho.is_finite()).then(|| STABLE_REAL_EXTENT / rho)
}

/// Integrates the flow from `l0` until `‖K‖_∞ < stop_tol` or `t_max`.
pub fn run_flow(t: &Triangulation, l0: &[f64], cfg: &FlowConfig) -> Result<FlowTrajectory> {
    cfg.validate()?;
    check_initial(t, l0)?;
    let rhs = Rhs { t, cfg };
    let record = |time: f64, l: &[f64], k: &CurvatureVector| -> Result<Sample> {
        Ok(Sample {
            t: time,
            l: MetricVector(l.to_vec()),
            k: k.clone(),
            h: functional_h_with(t, l, &cfg.quadrature, cfg.evaluation)?,
        })
    };

    let mut time = 0.0;
    let mut y = l0.to_vec();
    let mut k = rhs.curvature(&y);
    let mut samples = vec![record(time, &y, &k)?];
    let mut steps = 0usize;
    let mut h = cfg.dt;
    let end_slack = 1e-12 * cfg.t_max.max(1.0);

    let status = loop {
        if k.max_abs() < cfg.stop_tol {
            break FlowStatus::Converged;
        }
        if time >= cfg.t_max - end_slack {
            break FlowStatus::TMaxReached;
        }
        let f = rhs.velocity(&y, &k);
        let mut step = match cfg.method {
            Method::Rk4 => cfg.dt,
            Method::Rkf45 => h,
        }
        .min(cfg.t_max - time);

        let accepted = loop {
            if step < MIN_STEP {
                break None;
            }
            let (next, grow) = match cfg.method {
                Method::Rk4 => (rk4_step(&rhs, &y, &f, step), None),
                Method::Rkf45 => {
                    let (next, err) = rkf45_step(&rhs, &y, &f, step);
                    let norm = err
                        .iter()
                        .zip(y.iter().zip(&next))
                        .map(|(e, (a, b))| e.abs() / (cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs())))
                        .fold(0.0, f64::max);
                    if !(norm <= 1.0) {
                        step *= if norm.is_finite() { (0.9 * norm.powf(-0.2)).clamp(0.1, 0.5) } else { 0.5 };
                        continue;
                    }
                    let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                    (next, Some(factor))
                }
            };
            if next.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                step *= 0.5;
                continue;
            }
            break Some((next, step, grow));
        };

        let Some((next, taken, grow)) = accepted else {
            break FlowStatus::Diverged(format!(
                "step size fell below {MIN_STEP:e} at t = {time}; the flow exists for all time, so this is a numerical failure"
            ));
        };
        if let Some(factor) = grow {
            h = taken * factor;
        }
        time += taken;
        if (cfg.t_max - time).abs() <= end_slack {
            time = cfg.t_max;
        }
        let k_next = rhs.curvature(&next);
        if let Some(cap) = stability_cap(&y, &f, &next, &rhs.velocity(&next, &k_next)) {
            h = h.min(cap);
        }
        y = next;
        k = k_next;
        steps += 1;
        let finished = k.max_abs() < cfg.stop_tol || time >= cfg.t_max;
        if steps.is_multiple_of(cfg.record_every) || finished {
            samples.push(record(time, &y, &k)?);
        }
    };

    if matches!(status, FlowStatus::Diverged(_)) && samples.last().map(|s| s.t) != Some(time) {
        samples.push(record(time, &y, &k)?);
    }
    Ok(FlowTrajectory { samples, status, steps })
}

fn require_realizable(t: &Triangulation, l: &[f64]) -> Result<()> {
    match first_unrealizable(t, l)? {
        Some(tet) => Err(Error::NotRealizable { tet }),
        None => Ok(()),
    }
}

/// Damped Newton iteration on `K(l) = 0` starting from a nearby realizable metric.
pub fn newton_refine(t: &Triangulation, l: &[f64], tol: f64) -> Result<MetricVector> {
    check_initial(t, l)?;
    require_realizable(t, l)?;
    let mut current = l.to_vec();
    let mut k = curvature_with(t, &current, Evaluation::Serial)?;
    let mut residual = k.max_abs();
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if residual < tol {
            return Ok(MetricVector(current));
        }
        let jac = curvature_jacobian(t, &current)?;
        let rhs = DVector::from_column_slice(&k);
        let delta = jac.raw.clone().lu().solve(&rhs).ok_or(Error::SingularJacobian)?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut lambda = 1.0;
        let mut improved = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = current.iter().zip(delta.iter()).map(|(l, d)| l - lambda * d).collect();
            if trial.iter().all(|&v| v > 0.0) && first_unrealizable(t, &trial)?.is_none() {
                let kt = curvature_with(t, &trial, Evaluation::Serial)?;
                if kt.max_abs() < residual {
                    improved = Some((trial, kt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match improved {
            Some((trial, kt)) => {
                current = trial;
                residual = kt.max_abs();
                k = kt;
            }
            None => return Err(Error::LineSearch { metric: MetricVector(current), residual }),
        }
    }
    if residual < tol {
        Ok(MetricVector(current))
    } else {
        Err(Error::LineSearch { metric: MetricVector(current), residual })
    }
}

/// Summary of a [`solve`] run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub realizability: Vec<TetRealizability>,
    pub max_abs_curvature: f64,
    /// `None` when the trajectory tail is too short to fit.
    pub convergence: Option<ConvergenceReport>,
    pub flow_status: FlowStatus,
}

impl SolveReport {
    pub fn all_realizable(&self) -> bool {
        self.realizability.iter().all(|r| r.realizable)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub metric: MetricVector,
    pub trajectory: FlowTrajectory,
    pub report: SolveReport,
}

/// Flow from `l0`, then polish the end point with Newton.
pub fn solve(t: &Triangulation, l0: &[f64], cfg: &FlowConfig) -> Result<Solution> {
    let trajectory = run_flow(t, l0, cfg)?;
    if let FlowStatus::Diverged(reason) = &trajectory.status {
        return Err(Error::Diverged(reason.clone()));
    }
    let metric = newton_refine(t, &trajectory.last().l, cfg.newton_tol)?;
    let k = curvature_with(t, &metric, cfg.evaluation)?;
    let report = SolveReport {
        realizability: realizability_report(t, &metric)?,
        max_abs_curvature: k.max_abs(),
        convergence: fit_rate(&trajectory, DEFAULT_TAIL_FRACTION).ok(),
        flow_status: trajectory.status.clone(),
    };
    Ok(Solution { metric, trajectory, report })
}
