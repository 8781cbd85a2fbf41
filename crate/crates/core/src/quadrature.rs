//! Gauss–Legendre rules: fixed, composite and locally adaptive.

use std::f64::consts::PI;

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrates `f` over [a, b] split into `panels` equal pieces.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + width * p as f64;
                let hi = if p + 1 == panels { b } else { lo + width };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }

    /// Recursive bisection: a panel is accepted once its two halves agree
    /// with the whole to within `tol`.
    pub fn integrate_adaptive<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, tol: f64, mut f: F) -> f64 {
        let whole = self.integrate(a, b, &mut f);
        self.bisect(a, b, whole, tol, 0, &mut f)
    }

    fn bisect<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        f: &mut F,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = self.integrate(a, mid, &mut *f);
        let right = self.integrate(mid, b, &mut *f);
        let split = left + right;
        if (split - whole).abs() < tol || depth >= 40 {
            return split;
        }
        self.bisect(a, mid, left, 0.5 * tol, depth + 1, f)
            + self.bisect(mid, b, right, 0.5 * tol, depth + 1, f)
    }
}

/// Returns (P_n(x), P_n'(x)) via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 16, 32] {
            let rule = GaussLegendre::new(n);
            assert_abs_diff_eq!(rule.integrate(-1.0, 1.0, |_| 1.0), 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::new(16);
        // x^31 is odd, x^30 integrates to 2/31
        assert_abs_diff_eq!(rule.integrate(-1.0, 1.0, |x| x.powi(30)), 2.0 / 31.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate(0.0, 1.0, |x| x.powi(31)), 1.0 / 32.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_and_adaptive_agree_on_smooth_integrand() {
        let rule = GaussLegendre::new(16);
        let exact = 1.0 - (-3.0f64).exp();
        assert_abs_diff_eq!(rule.integrate_composite(0.0, 3.0, 4, |x| (-x).exp()), exact, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate_adaptive(0.0, 3.0, 1e-13, |x| (-x).exp()), exact, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let rule = GaussLegendre::new(16);
        let v = rule.integrate_adaptive(-1.0, 2.0, 1e-12, |x: f64| x.abs());
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-11);
    }
}
