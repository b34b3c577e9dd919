//! Modified Bessel function of the first kind, order one.
//!
//! `i1` targets relative error below 1e-12 on `[0, ~700]`. Two branches:
//! a power series in `x²/4` below [`SERIES_CUTOFF`], and the large-argument
//! expansion `I₁(x) ≈ eˣ/√(2πx) · Σ (-1)ᵏ aₖ/xᵏ` above it. The scaled
//! variant `e⁻ˣ I₁(x)` is what the transition-density code actually wants,
//! since there the exponential is folded into a larger combined exponent.

use crate::error::{Error, Result};

/// Branch switchover point. Both branches meet their accuracy target here;
/// tests compare them against each other at the seam.
pub const SERIES_CUTOFF: f64 = 15.0;

const MAX_SERIES_TERMS: usize = 200;

/// `I₁(x)/x`, analytic at the origin with value `1/2`.
///
/// This is the shape the compound-Poisson transition density needs: the
/// apparent `(cr-z)^{-1/2}` factor in the density cancels against the
/// leading behaviour of `I₁`, and going through `I₁(x)/x` keeps that
/// cancellation exact near the endpoint.
fn i1_over_x_series(x: f64) -> f64 {
    // I1(x)/x = (1/2) * sum_k (x^2/4)^k / (k! (k+1)!)
    let q = 0.25 * x * x;
    let mut term = 0.5;
    let mut sum = term;
    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Scaled asymptotic tail `e⁻ˣ I₁(x)` for `x ≥ SERIES_CUTOFF`.
///
/// Truncates the (divergent) expansion at its smallest term; at x = 15 that
/// leaves a relative error around 1e-12, improving for larger arguments.
fn i1_scaled_asymptotic(x: f64) -> f64 {
    // a_k(1) = prod_{j=1..k} (4 - (2j-1)^2) / (k! 8^k), signs folded in.
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..40usize {
        let j = (2 * k - 1) as f64;
        // signed term of Σ (-1)^k a_k(1)/x^k
        term *= (j * j - 4.0) / (k as f64 * 8.0 * x);
        if term.abs() >= prev {
            break; // asymptotic series started diverging
        }
        sum += term;
        prev = term.abs();
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `e⁻ˣ I₁(x)` for `x ≥ 0`. Never overflows; decays like `1/√x`.
pub fn i1_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "i1_scaled: negative argument {x}");
    if x < SERIES_CUTOFF {
        i1_over_x_series(x) * x * (-x).exp()
    } else {
        i1_scaled_asymptotic(x)
    }
}

/// `e⁻ˣ I₁(x) / x`, the scaled form of [`i1_over_x_series`]; finite limit
/// `1/2` at `x = 0`.
pub fn i1_scaled_over_x(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "i1_scaled_over_x: negative argument {x}");
    if x < SERIES_CUTOFF {
        i1_over_x_series(x) * (-x).exp()
    } else {
        i1_scaled_asymptotic(x) / x
    }
}

/// `I₁(x)` for `x ≥ 0`.
///
/// # Errors
/// [`Error::Overflow`] once `eˣ/√(2πx)` exceeds the f64 range (x ≳ 713).
pub fn i1(x: f64) -> Result<f64> {
    debug_assert!(x >= 0.0, "i1: negative argument {x}");
    if x < SERIES_CUTOFF {
        return Ok(i1_over_x_series(x) * x);
    }
    let value = x.exp() * i1_scaled_asymptotic(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { what: format!("I1({x})") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: direct series summation, no reuse of the branch
    /// selection above. Converges for every finite x, just slowly.
    fn i1_series_oracle(x: f64, terms: usize) -> f64 {
        let half = 0.5 * x;
        let q = half * half;
        let mut term = half;
        let mut sum = term;
        for k in 1..terms {
            let kf = k as f64;
            term *= q / (kf * (kf + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn vanishes_at_origin() {
        assert_eq!(i1(0.0).unwrap(), 0.0);
        assert_eq!(i1_scaled(0.0), 0.0);
        assert_eq!(i1_scaled_over_x(0.0), 0.5);
    }

    #[test]
    fn small_argument_leading_term() {
        // I1(x)/(x/2) -> 1 as x -> 0
        let x = 1e-6;
        assert_relative_eq!(i1(x).unwrap() / (x / 2.0), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn matches_forty_term_series_at_two() {
        let oracle = i1_series_oracle(2.0, 40);
        assert_relative_eq!(i1(2.0).unwrap(), oracle, max_relative = 1e-12);
        // and the independently computed high-precision value
        assert_relative_eq!(i1(2.0).unwrap(), 1.5906368546373290634, max_relative = 1e-13);
    }

    #[test]
    fn reference_values() {
        // mpmath besseli(1, x) to 20 digits
        for (x, want) in [
            (0.5, 0.25789430539089631636),
            (1.0, 0.56515910399248502721),
            (5.0, 24.335642142450527199),
            (20.0, 42454973.385127770181),
            (30.0, 768532038938.95699949),
            (100.0, 1.0683693903381624812e42),
            (700.0, 1.5285003902339006881e302),
        ] {
            assert_relative_eq!(i1(x).unwrap(), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn scaled_reference_values() {
        for (x, want) in [
            (2.0, 0.21526928924893765916),
            (15.0, 0.10037417504516665529),
            (30.0, 0.071916330598647554706),
            (100.0, 0.039744153025130252674),
            (700.0, 0.015070519444716846949),
            (5000.0, 0.0056414726668388859036),
        ] {
            assert_relative_eq!(i1_scaled(x), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn branches_agree_at_the_seam() {
        // series vs asymptotic, both evaluated at the switchover point
        let series = i1_over_x_series(SERIES_CUTOFF) * SERIES_CUTOFF;
        let asym = SERIES_CUTOFF.exp() * i1_scaled_asymptotic(SERIES_CUTOFF);
        assert_relative_eq!(series, asym, max_relative = 1e-11);
        // and the scaled variants
        let s = i1_over_x_series(SERIES_CUTOFF) * SERIES_CUTOFF * (-SERIES_CUTOFF).exp();
        assert_relative_eq!(s, i1_scaled_asymptotic(SERIES_CUTOFF), max_relative = 1e-11);
    }

    #[test]
    fn asymptotic_branch_vs_long_series() {
        // the oracle series converges for any x; checks the asymptotic branch
        for x in [16.0, 20.0, 30.0] {
            let oracle = i1_series_oracle(x, 150);
            assert_relative_eq!(i1(x).unwrap(), oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn overflow_is_signalled() {
        assert!(matches!(i1(720.0), Err(Error::Overflow { .. })));
        // scaled form stays finite there
        assert!(i1_scaled(720.0).is_finite());
    }

    #[test]
    fn seam_agreement_scan() {
        // series and asymptotic branches within 1e-11 of each other on [0,30]
        // wherever both are trustworthy (x >= 12 for the asymptotic side).
        for i in 0..=60 {
            let x = 12.0 + 18.0 * (i as f64) / 60.0;
            let series = i1_series_oracle(x, 200);
            let asym = x.exp() * i1_scaled_asymptotic(x);
            assert_relative_eq!(series, asym, max_relative = 2e-11);
        }
    }
}
