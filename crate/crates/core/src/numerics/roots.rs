//! Bracketed scalar root finding: secant steps guarded by bisection.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("root iteration did not converge on [{lo}, {hi}] after {iterations} steps")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },
}

/// Find the root of `f` inside `[lo, hi]`.
///
/// The bracket must straddle a sign change. Each step tries a secant
/// update; whenever the proposal leaves the current bracket (or makes too
/// little progress) a bisection step is used instead, so convergence is
/// guaranteed for continuous `f`.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> Result<f64, RootError> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }
    const MAX_ITER: usize = 200;
    for _ in 0..MAX_ITER {
        // The bracket width cannot shrink below the local floating-point
        // spacing; treat that as converged too.
        let tol = xtol.max(4.0 * f64::EPSILON * a.abs().max(b.abs()));
        // Secant proposal from the current bracket endpoints.
        let mut x = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        if !x.is_finite() || x <= a || x >= b {
            x = mid;
        }
        let fx = f(x);
        if fx == 0.0 || (b - a) < tol {
            return Ok(x);
        }
        if fa.signum() == fx.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a) < tol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(RootError::NoConvergence { lo, hi, iterations: MAX_ITER })
}
