//! Bracketed root finding: bisection with secant polish.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Find a root of `f` inside `[lo, hi]`.
///
/// Requires a sign change: `f(lo)·f(hi) ≤ 0`. Iterates a guarded secant step
/// (falling back to bisection whenever the secant candidate leaves the
/// bracket or stalls) until `|f(x)| ≤ tol` or the bracket width drops to
/// `tol`.
///
/// # Errors
/// [`Error::InvalidBracket`] when the sign condition fails.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    assert!(tol > 0.0, "root tolerance must be positive");
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::InvalidBracket { lo, hi, f_lo: fa, f_hi: fb });
    }

    let mut x = a;
    for _ in 0..MAX_ITER {
        // secant candidate from the current bracket endpoints
        let mut cand = b - fb * (b - a) / (fb - fa);
        if !cand.is_finite() || cand <= a || cand >= b {
            cand = 0.5 * (a + b);
        }
        x = cand;
        let fx = f(x);
        if fx == 0.0 || fx.abs() <= tol || (b - a).abs() <= tol {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
        // guard against one-sided secant stagnation
        if (b - a).abs() <= tol {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear() {
        let x = find_root(|x| x - 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_bracket() {
        let r = find_root(|x| x * x, 0.5, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::InvalidBracket { .. })));
    }

    #[test]
    fn transcendental() {
        let x = find_root(|x| x.exp() - 3.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(x, 3.0f64.ln(), epsilon = 1e-10);
    }
}
