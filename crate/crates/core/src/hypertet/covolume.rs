//! Co-volume as the line integral of the dihedral-angle 1-form
//! `mu = Σ alpha_e dl_e` from the origin, offset by its value at the origin.

use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

use super::{extended_dihedral_angles, lobachevsky, phi_all, EdgeLengths6};
use crate::quadrature::GaussLegendre;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Panel-doubling control for the segment integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovolumeQuadrature {
    /// Stop when successive estimates differ by less than
    /// `rel_tol * max(1, |estimate|)`.
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for CovolumeQuadrature {
    fn default() -> Self {
        Self { rel_tol: 1e-13, max_panels: 1024 }
    }
}

/// Co-volume of the degenerate tetrahedron with all lengths zero,
/// `16 Л(pi/4)`.
pub fn covolume_at_origin() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| 16.0 * lobachevsky(FRAC_PI_4))
}

/// Grid used to bracket the points where the integrand loses smoothness.
const SCAN_POINTS: usize = 128;

/// Parameters in (0, 1) where some dihedral cosine crosses ±1 or some
/// coordinate crosses 0. Between consecutive breakpoints the integrand is
/// analytic up to square-root behaviour at the ends.
fn breakpoints(from: &EdgeLengths6, delta: &[f64; 6]) -> Vec<f64> {
    let point = |s: f64| EdgeLengths6(std::array::from_fn(|i| from.0[i] + s * delta[i]));
    let signature = |s: f64| -> [f64; 18] {
        let p = point(s);
        let phis = phi_all(&p.cosh());
        std::array::from_fn(|k| match k {
            0..=5 => phis[k] - 1.0,
            6..=11 => phis[k - 6] + 1.0,
            _ => p.0[k - 12],
        })
    };
    let mut out = Vec::new();
    let mut prev_s = 0.0;
    let mut prev = signature(0.0);
    for step in 1..=SCAN_POINTS {
        let s = step as f64 / SCAN_POINTS as f64;
        let cur = signature(s);
        for k in 0..18 {
            if (prev[k] < 0.0) != (cur[k] < 0.0) && prev[k] != 0.0 && cur[k] != 0.0 {
                let (mut lo, mut hi) = (prev_s, s);
                let lo_negative = prev[k] < 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (signature(mid)[k] < 0.0) == lo_negative {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
        prev_s = s;
        prev = cur;
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out.retain(|&s| s > 1e-14 && s < 1.0 - 1e-14);
    out
}

/// ∫ mu along the straight segment `from -> to`.
///
/// The segment is split where the integrand is not smooth; each piece is
/// integrated under the substitution `s = a + (b - a)(3τ² - 2τ³)`, which
/// flattens square-root endpoint behaviour, with composite 16-point
/// Gauss–Legendre and panel doubling.
pub fn line_integral(from: &EdgeLengths6, to: &EdgeLengths6, quad: &CovolumeQuadrature) -> f64 {
    let delta: [f64; 6] = std::array::from_fn(|i| to.0[i] - from.0[i]);
    if delta.iter().all(|&d| d == 0.0) {
        return 0.0;
    }
    let integrand = |s: f64| {
        let point = EdgeLengths6(std::array::from_fn(|i| from.0[i] + s * delta[i]));
        let angles = extended_dihedral_angles(&point);
        angles.0.iter().zip(&delta).map(|(a, d)| a * d).sum::<f64>()
    };
    let mut knots = vec![0.0];
    knots.extend(breakpoints(from, &delta));
    knots.push(1.0);
    knots
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let width = b - a;
            let smoothed = |tau: f64| {
                let s = a + width * tau * tau * (3.0 - 2.0 * tau);
                integrand(s) * width * 6.0 * tau * (1.0 - tau)
            };
            integrate_doubling(smoothed, quad)
        })
        .sum()
}

fn integrate_doubling(f: impl Fn(f64) -> f64, quad: &CovolumeQuadrature) -> f64 {
    let gl = rule();
    let mut panels = 1;
    let mut previous = gl.integrate_composite(0.0, 1.0, panels, &f);
    loop {
        panels *= 2;
        let current = gl.integrate_composite(0.0, 1.0, panels, &f);
        if (current - previous).abs() < quad.rel_tol * current.abs().max(1.0) || panels >= quad.max_panels {
            return current;
        }
        previous = current;
    }
}

/// Co-volume of one generalized tetrahedron; any real lengths are accepted.
pub fn tetra_covolume(l: &EdgeLengths6, quad: &CovolumeQuadrature) -> f64 {
    line_integral(&EdgeLengths6([0.0; 6]), l, quad) + covolume_at_origin()
}
