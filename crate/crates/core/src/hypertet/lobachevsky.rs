use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::quadrature::GaussLegendre;

/// Width of the window near the logarithmic singularity that is handled
/// analytically.
const SINGULAR_WINDOW: f64 = 1e-3;
const PANEL_TOL: f64 = 1e-13;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Lobachevsky function `-∫_0^θ ln|2 sin t| dt`.
///
/// Odd and pi-periodic, so it is positive on (0, pi/2) with maximum at pi/6.
pub fn lobachevsky(theta: f64) -> f64 {
    if !theta.is_finite() {
        return f64::NAN;
    }
    let reduced = theta.rem_euclid(PI);
    if reduced > FRAC_PI_2 {
        -lobachevsky_half(PI - reduced)
    } else {
        lobachevsky_half(reduced)
    }
}

/// Evaluates on [0, pi/2], where the only singularity of the integrand is at 0.
fn lobachevsky_half(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let quad = rule();
    let eps = theta.min(SINGULAR_WINDOW);
    // ∫_0^eps ln(2t) dt in closed form, plus the smooth remainder ln(sin t / t)
    let head =
        eps * ((2.0 * eps).ln() - 1.0) + quad.integrate_adaptive(0.0, eps, PANEL_TOL, |t| (t.sin() / t).ln());
    let tail = if theta > eps {
        quad.integrate_adaptive(eps, theta, PANEL_TOL, |t| (2.0 * t.sin()).ln())
    } else {
        0.0
    };
    -(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Fourier series `½ Σ sin(2kθ)/k²`, slowly convergent but independent.
    fn fourier(theta: f64, terms: usize) -> f64 {
        0.5 * (1..=terms)
            .map(|k| {
                let k = k as f64;
                (2.0 * k * theta).sin() / (k * k)
            })
            .sum::<f64>()
    }

    #[test]
    fn zeros() {
        assert_eq!(lobachevsky(0.0), 0.0);
        assert_abs_diff_eq!(lobachevsky(FRAC_PI_2), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(lobachevsky(PI), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn quarter_pi_is_half_catalan() {
        assert_abs_diff_eq!(lobachevsky(PI / 4.0), 0.457_982_797_088_609_5, epsilon = 1e-13);
    }

    #[test]
    fn known_maximum_at_pi_over_six() {
        // Л(π/6) = (3/2) Л(π/3), from the duplication formula
        assert_abs_diff_eq!(lobachevsky(PI / 6.0), 1.5 * lobachevsky(PI / 3.0), epsilon = 1e-13);
        assert_abs_diff_eq!(lobachevsky(PI / 6.0), 0.507_470_803_204_826_8, epsilon = 1e-12);
    }

    #[test]
    fn odd_and_periodic() {
        for theta in [0.1, 0.7, 1.3, 2.9] {
            assert_abs_diff_eq!(lobachevsky(-theta), -lobachevsky(theta), epsilon = 1e-14);
            assert_abs_diff_eq!(lobachevsky(theta + 3.0 * PI), lobachevsky(theta), epsilon = 1e-12);
        }
    }

    #[test]
    fn agrees_with_fourier_series() {
        for theta in [0.05, 0.3, 0.9, 1.4, 2.2, 3.0] {
            assert_abs_diff_eq!(lobachevsky(theta), fourier(theta, 200_000), epsilon = 1e-5);
        }
    }
}
