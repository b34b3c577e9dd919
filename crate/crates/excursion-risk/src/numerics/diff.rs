//! Central-difference differentiation with one Richardson extrapolation.

/// First derivative of `f` at `x`.
///
/// Step `h = scale · max(1, |x|) · ε^{1/3}`; the central differences at `h`
/// and `h/2` are combined as `(4·D(h/2) − D(h))/3`, cancelling the leading
/// `O(h²)` term.
pub fn differentiate<F: Fn(f64) -> f64>(f: F, x: f64, scale: f64) -> f64 {
    assert!(scale > 0.0, "differentiation scale must be positive");
    let h = scale * x.abs().max(1.0) * f64::EPSILON.cbrt();
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let d1 = d(h);
    let d2 = d(0.5 * h);
    (4.0 * d2 - d1) / 3.0
}
