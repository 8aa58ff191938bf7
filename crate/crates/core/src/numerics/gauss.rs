//! Gauss–Legendre rules on [-1, 1], computed once per order by Newton
//! iteration on the Legendre polynomial and cached.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Map the rule onto [a, b] and return (abscissae, weights).
    pub fn scaled(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let xs = self.nodes.iter().map(|t| mid + half * t).collect();
        let ws = self.weights.iter().map(|w| w * half).collect();
        (xs, ws)
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * t);
        }
        acc * half
    }
}

fn compute_rule(order: usize) -> GaussRule {
    assert!(order >= 1, "Gauss rule order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Roots come in +/- pairs; solve for the upper half.
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

/// Cached n-point Gauss–Legendre rule.
pub fn gauss_legendre(order: usize) -> GaussRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss rule cache poisoned");
    guard.entry(order).or_insert_with(|| compute_rule(order)).clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // n-point Gauss is exact up to degree 2n-1.
        let rule = gauss_legendre(4);
        let val = rule.integrate(-1.0, 1.0, |x| x.powi(6));
        assert!((val - 2.0 / 7.0).abs() < 1e-14, "got {val}");
        let val = rule.integrate(0.0, 2.0, |x| 3.0 * x * x);
        assert!((val - 8.0).abs() < 1e-13);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [2, 5, 8, 16, 31] {
            let rule = gauss_legendre(order);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "order {order}: {total}");
        }
    }

    #[test]
    fn handles_oscillatory_integrand() {
        let rule = gauss_legendre(16);
        let val = rule.integrate(0.0, 1.0, |x| (10.0 * x).sin());
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((val - exact).abs() < 1e-12);
    }
}
