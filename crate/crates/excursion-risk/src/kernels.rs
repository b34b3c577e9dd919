//! The `Υ(r)` and `Λ(x, r)` kernels and the generic excursion-duration law
//! `F_{D₁}`, `f_{D₁}`.
//!
//! `Υ(r) = ∫₀^∞ (z/r) P(X_r ∈ dz) = E[X_r⁺]/r` decreases from `c` at `0⁺`
//! to `E[X₁]` at infinity. Internally the complement
//! `ῡ(r) = Υ(r) − E[X₁] = E[X_r⁻]/r` is the tabulated object: it is a small
//! positive tail quantity, so survival probabilities built from it never
//! lose precision to cancellation.
//!
//! `Λ(x, r) = ∫₀^∞ W(x+u)(u/r) P(X_r ∈ du)`. For `x ≥ 0` the scale
//! function is a two-exponential sum over the whole integration range and
//! the integral collapses to
//! `Λ(x, r) = Υ(r)(1 − e^{−γx})/E[X₁] + e^{−γx}`, `γ = α − η/c`.
//! For `x < 0` that collapse is invalid — `W` vanishes on `(x, 0)` — and
//! `Λ(x, r) = P_x(τ₀⁺ < r)` must honour causality (`Λ = 0` once `|x| ≥ cr`),
//! so the defining integral with the zero-extended `W` is evaluated
//! directly.
//!
//! The duration of a generic negative excursion starts from a deficit that
//! is `Exp(α)` by memorylessness, giving
//! `F_{D₁}(y) = (1 − W(0)Υ(y)) / (1 − E[X₁]W(0)) = 1 − (α/η) ῡ(y)`.

use crate::cl_model::{claim_sum_density, mean_per_unit, scale_w, ClParams};
use crate::error::{Error, Result};
use crate::numerics::{self, differentiate, integrate, integrate_to_inf, MonotoneCubic};

/// `Υ(r)` by direct quadrature of the defining integral (atom plus the
/// claim-sum density over `(0, cr)`).
pub fn upsilon(p: &ClParams, r: f64, tol: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("upsilon horizon must be > 0, got {r}")));
    }
    let cr = p.c() * r;
    let q = integrate(|s| (cr - s) * claim_sum_density(p, r, s), 0.0, cr, tol)?;
    Ok((-p.eta() * r).exp() * p.c() + q.value / r)
}

/// `ῡ(r) = Υ(r) − E[X₁] = E[X_r⁻]/r`, computed from the claim-sum tail so
/// small values come out at full relative precision.
pub fn upsilon_excess(p: &ClParams, r: f64, tol: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("upsilon horizon must be > 0, got {r}")));
    }
    let cr = p.c() * r;
    let q = integrate_to_inf(|s| (s - cr) * claim_sum_density(p, r, s), cr, tol.min(1e-13))?;
    Ok((q.value / r).max(0.0))
}

/// `Λ(x, r)`: closed form for `x ≥ 0`, defining integral for `x < 0` (where
/// it equals the upcrossing probability `P_x(τ₀⁺ < r)`).
pub fn lambda0(p: &ClParams, x: f64, r: f64, tol: f64) -> Result<f64> {
    let ups = upsilon(p, r, tol)?;
    lambda0_with_upsilon(p, x, r, ups, tol)
}

pub(crate) fn lambda0_with_upsilon(
    p: &ClParams,
    x: f64,
    r: f64,
    ups: f64,
    tol: f64,
) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda horizon must be > 0, got {r}")));
    }
    if x >= 0.0 {
        let decay = (-p.adjustment_coeff() * x).exp();
        return Ok(ups * (1.0 - decay) / mean_per_unit(p) + decay);
    }
    let cr = p.c() * r;
    if cr + x <= 0.0 {
        return Ok(0.0); // cannot reach zero from x in time r even claim-free
    }
    // atom at u = cr plus density over u ∈ (−x, cr); in claim-sum
    // coordinates s = cr − u the range is s ∈ (0, cr + x)
    let atom = p.c() * (-p.eta() * r).exp() * scale_w(p, x + cr);
    let q = integrate(
        |s| scale_w(p, x + cr - s) * ((cr - s) / r) * claim_sum_density(p, r, s),
        0.0,
        cr + x,
        tol,
    )?;
    Ok(atom + q.value)
}

/// CDF of a generic excursion duration:
/// `F_{D₁}(y) = 1 − (α/η) ῡ(y)`, clamped to `[0, 1]`.
pub fn d1_cdf(p: &ClParams, y: f64, tol: f64) -> Result<f64> {
    Ok((1.0 - d1_sf_raw(p, y, tol)?).clamp(0.0, 1.0))
}

/// Survival function `1 − F_{D₁}(y)` without the complementary subtraction,
/// exact in the small-tail regime.
pub fn d1_sf(p: &ClParams, y: f64, tol: f64) -> Result<f64> {
    Ok(d1_sf_raw(p, y, tol)?.clamp(0.0, 1.0))
}

fn d1_sf_raw(p: &ClParams, y: f64, tol: f64) -> Result<f64> {
    Ok(p.alpha() / p.eta() * upsilon_excess(p, y, tol)?)
}

/// Density `f_{D₁}(y) = dF_{D₁}/dy`, by central differencing of the CDF.
pub fn d1_pdf(p: &ClParams, y: f64, tol: f64) -> Result<f64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be > 0, got {y}")));
    }
    let f = |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            d1_cdf(p, t, tol).unwrap_or(f64::NAN)
        }
    };
    let scale = (0.5 * y).min(1.0).max(1e-3);
    let d = differentiate(f, y, scale);
    if d.is_nan() {
        return Err(Error::NonConvergence {
            what: "d1_pdf".into(),
            detail: format!("CDF evaluation failed near y={y}"),
        });
    }
    Ok(d)
}

/// Memoized kernel evaluations for one parameter set.
///
/// `ῡ` is tabulated on a graded grid out to the point where the excursion
/// survival probability drops below ~1e-13 and interpolated with a monotone
/// cubic, keeping every derived CDF monotone. The inverse CDF of `D₁` is
/// tabulated alongside for quantile lookups and inverse-transform sampling.
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct KernelCache {
    params: ClParams,
    tol: f64,
    ubar: MonotoneCubic,
    quantile: MonotoneCubic,
    y_cap: f64,
}

/// Survival mass below which the tabulation stops and `F_{D₁}` is treated
/// as exactly one.
const SF_FLOOR: f64 = 1e-13;
const MAX_NODES: usize = 40_000;

impl KernelCache {
    /// Build the cache with the default kernel tolerance.
    pub fn new(params: ClParams) -> Result<Self> {
        Self::with_tolerance(params, numerics::DEFAULT_QUAD_TOL)
    }

    pub fn with_tolerance(params: ClParams, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let p = &params;
        let sf_scale = p.alpha() / p.eta();

        // graded grid: linear steps near zero, 0.5% relative growth beyond
        let h_min = 2e-3 / p.eta();
        let rel = 5e-3;
        let mut ys = vec![0.0];
        let mut us = vec![p.eta() / p.alpha()]; // ῡ(0⁺) = c − E[X₁] = η/α
        let mut y = h_min;
        loop {
            let u = upsilon_excess(p, y, tol)?;
            ys.push(y);
            us.push(u);
            if sf_scale * u < SF_FLOOR {
                break;
            }
            if ys.len() >= MAX_NODES {
                return Err(Error::NonConvergence {
                    what: "kernel tabulation".into(),
                    detail: format!("survival tail still {:.3e} after {MAX_NODES} nodes", sf_scale * u),
                });
            }
            y += h_min.max(rel * y);
        }
        let y_cap = *ys.last().unwrap();

        // inverse CDF nodes: u_i = F(y_i) must be strictly increasing
        let mut qx = Vec::with_capacity(ys.len());
        let mut qy = Vec::with_capacity(ys.len());
        let mut last = -1.0;
        for (yi, ui) in ys.iter().zip(&us) {
            let fi = (1.0 - sf_scale * ui).clamp(0.0, 1.0);
            if fi > last {
                qx.push(fi);
                qy.push(*yi);
                last = fi;
            }
        }

        let ubar = MonotoneCubic::new(ys, us);
        let quantile = MonotoneCubic::new(qx, qy);
        let cache = Self { params, tol, ubar, quantile, y_cap };
        debug_assert!(cache.table_is_monotone());
        Ok(cache)
    }

    fn table_is_monotone(&self) -> bool {
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let r = self.y_cap * i as f64 / 400.0;
            let u = self.ubar_at(r.max(1e-12));
            if u > prev + 1e-12 || u < -1e-12 {
                return false;
            }
            prev = u;
        }
        true
    }

    pub fn params(&self) -> &ClParams {
        &self.params
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Duration beyond which `1 − F_{D₁}` is below ~1e-13.
    pub fn duration_cap(&self) -> f64 {
        self.y_cap
    }

    fn ubar_at(&self, r: f64) -> f64 {
        if r >= self.y_cap {
            0.0
        } else {
            self.ubar.eval(r).max(0.0)
        }
    }

    /// Interpolated `Υ(r)`.
    pub fn upsilon(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        mean_per_unit(&self.params) + self.ubar_at(r)
    }

    /// Interpolated `ῡ(r) = Υ(r) − E[X₁]`.
    pub fn upsilon_excess(&self, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        self.ubar_at(r)
    }

    /// `Λ(x, r)` using the cached `Υ` for `x ≥ 0`; the `x < 0` branch
    /// evaluates the defining integral directly.
    pub fn lambda0(&self, x: f64, r: f64) -> Result<f64> {
        lambda0_with_upsilon(&self.params, x, r, self.upsilon(r), self.tol)
    }

    /// `F_{D₁}(y)`.
    pub fn d1_cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        (1.0 - self.d1_sf(y)).clamp(0.0, 1.0)
    }

    /// `1 − F_{D₁}(y)`.
    pub fn d1_sf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        (self.params.alpha() / self.params.eta() * self.ubar_at(y)).clamp(0.0, 1.0)
    }

    /// `f_{D₁}(y)`, the derivative of the interpolated CDF; nonnegative by
    /// monotonicity of the interpolant. At `y = 0` this is the one-sided
    /// limit `f(0⁺) = αc`, which the joint-density support edges need.
    pub fn d1_pdf(&self, y: f64) -> f64 {
        if y < 0.0 || y >= self.y_cap {
            return 0.0;
        }
        (-(self.params.alpha() / self.params.eta()) * self.ubar.eval_derivative(y)).max(0.0)
    }

    /// Quantile `F_{D₁}^{-1}(u)` for `u ∈ [0, 1)` (capped at the tabulation
    /// limit).
    pub fn d1_quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u));
        if u <= 0.0 {
            return 0.0;
        }
        if u >= self.quantile.x_max() {
            return self.y_cap;
        }
        self.quantile.eval(u).clamp(0.0, self.y_cap)
    }
}

/// Exponential-deficit average of the scale function,
/// `∫₀^∞ W(z − y) α e^{−αy} dy`.
///
/// With the classical ruin probability as prefactor this is the semi-
/// analytic side of the scale-function identity at ruin,
/// `E_x[W(X_{τ₀⁻} + z) 1{τ₀⁻ < ∞}] = W(x+z) − W(x)`.
pub fn deficit_averaged_scale(p: &ClParams, z: f64, tol: f64) -> Result<f64> {
    if z <= 0.0 {
        return Ok(0.0); // W(z − y) = 0 for all y > 0
    }
    let a = p.alpha();
    let q = integrate(|y| scale_w(p, z - y) * a * (-a * y).exp(), 0.0, z, tol)?;
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cl_model::transition_law;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const TOL: f64 = 1e-10;

    fn fig_params() -> ClParams {
        ClParams::new(5.5, 2.0, 0.5).unwrap()
    }

    #[test]
    fn upsilon_two_routes_agree() {
        let p = fig_params();
        for r in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let direct = upsilon(&p, r, TOL).unwrap();
            let tail = mean_per_unit(&p) + upsilon_excess(&p, r, TOL).unwrap();
            assert_abs_diff_eq!(direct, tail, epsilon = 1e-9);
        }
    }

    #[test]
    fn upsilon_reference_values() {
        // frozen from an independent quadrature of the defining integral
        // (scipy adaptive quad over the Bessel density, abs tol 1e-13)
        let p = fig_params();
        for (r, want) in [
            (0.1, 4.617235795623),
            (0.25, 3.821895410396),
            (0.5, 3.132931962283),
            (1.0, 2.540393191623),
            (2.0, 2.104259483030),
            (5.0, 1.742301772168),
        ] {
            assert_relative_eq!(upsilon(&p, r, TOL).unwrap(), want, epsilon = 1e-9);
        }
    }

    #[test]
    fn upsilon_limits() {
        let p = fig_params();
        // r -> 0+: atom dominates, Υ -> c
        let u = upsilon(&p, 1e-6, TOL).unwrap();
        assert!((u - 5.5).abs() <= 1e-4 * 5.5, "got {u}");
        // r -> ∞: law of large numbers, Υ -> E[X₁]
        let u = upsilon(&p, 200.0, TOL).unwrap();
        assert!((u - 1.5).abs() <= 1e-3, "got {u}");
    }

    #[test]
    fn upsilon_monotone_and_bounded_on_grid() {
        let p = fig_params();
        let mut prev = f64::INFINITY;
        for i in 1..=60 {
            let r = 0.1 * i as f64;
            let u = upsilon(&p, r, TOL).unwrap();
            assert!(u <= prev + 1e-9, "Υ increased at r={r}");
            assert!(u <= 5.5 + 1e-9 && u >= 1.5 - 1e-9);
            prev = u;
        }
    }

    #[test]
    fn lambda_at_zero_is_one() {
        let p = fig_params();
        for r in [0.1, 0.25, 0.5, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(lambda0(&p, 0.0, r, TOL).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lambda_closed_form_matches_defining_integral() {
        // x = 1, r = 1: quadrature of ∫ W(x+u)(u/r) P(X_r ∈ du)
        let p = fig_params();
        let law = transition_law(&p, 1.0).unwrap();
        let cr = law.atom_location();
        let q = integrate(|u| scale_w(&p, 1.0 + u) * u * law.density(u), 0.0, cr, 1e-12).unwrap();
        let defining = q.value + law.atom_mass() * cr * scale_w(&p, 1.0 + cr);
        assert_abs_diff_eq!(lambda0(&p, 1.0, 1.0, TOL).unwrap(), defining, epsilon = 1e-7);
    }

    #[test]
    fn lambda_negative_start_values() {
        let p = fig_params();
        // frozen from the scipy evaluation of the zero-extended integral
        assert_abs_diff_eq!(lambda0(&p, -1.0, 1.0, TOL).unwrap(), 0.8925196514281961, epsilon = 1e-7);
        // causality: cannot reach 0 from -1 in under 1/c time units
        assert_eq!(lambda0(&p, -1.0, 0.1, TOL).unwrap(), 0.0);
        assert_eq!(lambda0(&p, -1.0, 1.0 / 5.5, TOL).unwrap(), 0.0);
        // continuity across x = 0: both branches near 1
        let below = lambda0(&p, -1e-9, 1.0, TOL).unwrap();
        let above = lambda0(&p, 1e-9, 1.0, TOL).unwrap();
        assert_abs_diff_eq!(below, above, epsilon = 1e-6);
    }

    #[test]
    fn lambda_monotone_in_r_and_x_below_zero() {
        let p = fig_params();
        let mut prev = -1.0;
        for i in 1..=20 {
            let r = 0.25 * i as f64;
            let v = lambda0(&p, -0.5, r, TOL).unwrap();
            assert!(v >= prev - 1e-9, "not nondecreasing in r at {r}");
            prev = v;
        }
        let mut prev = -1.0;
        for i in 0..=20 {
            let x = -2.0 + 0.1 * i as f64;
            let v = lambda0(&p, x, 1.0, TOL).unwrap();
            assert!(v >= prev - 1e-9, "not nondecreasing in x at {x}");
            prev = v;
        }
    }

    #[test]
    fn d1_cdf_reference_and_limits() {
        let p = fig_params();
        // frozen from the scipy tail quadrature
        for (y, want) in [(0.5, 0.591767009429), (1.0, 0.739901702094), (2.0, 0.848935129243)] {
            assert_abs_diff_eq!(d1_cdf(&p, y, TOL).unwrap(), want, epsilon = 1e-9);
        }
        // F(0+) = 0 with linear rate αc: F(y) ≈ αc·y for small y
        let y = 1e-7;
        let f = d1_cdf(&p, y, TOL).unwrap();
        assert!(f <= 1e-6, "F(1e-7) = {f}");
        let y = 1e-6;
        let f = d1_cdf(&p, y, TOL).unwrap();
        assert_relative_eq!(f, p.alpha() * p.c() * y, max_relative = 2e-2);
        // F(∞) = 1
        let f = d1_cdf(&p, 1e3, TOL).unwrap();
        assert!(1.0 - f <= 1e-6, "1 - F(1e3) = {}", 1.0 - f);
    }

    #[test]
    fn d1_survival_two_algebraic_forms() {
        let p = fig_params();
        let w0 = scale_w(&p, 0.0);
        let e1 = mean_per_unit(&p);
        for y in [0.3, 1.0, 2.5, 7.0] {
            let ups = upsilon(&p, y, TOL).unwrap();
            let form_a = 1.0 - (1.0 - w0 * ups) / (1.0 - e1 * w0);
            let form_b = w0 * (ups - e1) / (1.0 - e1 * w0);
            assert_abs_diff_eq!(form_a, form_b, epsilon = 1e-12);
            assert_abs_diff_eq!(d1_sf(&p, y, TOL).unwrap(), form_b, epsilon = 1e-9);
        }
    }

    #[test]
    fn d1_pdf_normalizes_and_is_nonnegative() {
        let p = fig_params();
        let cache = KernelCache::new(p).unwrap();
        // ∫ f = F(cap) − F(0) up to quadrature tolerance; the integrand is
        // only C⁰ (node kinks), so don't demand more than ~1e-7 of the rule
        let total = integrate(|y| cache.d1_pdf(y), 0.0, cache.duration_cap(), 1e-7).unwrap();
        assert_abs_diff_eq!(total.value, 1.0, epsilon = 1e-6);
        // log-grid nonnegativity probe
        let mut y = 1e-3;
        while y < 1e3 {
            if y < cache.duration_cap() {
                assert!(cache.d1_pdf(y) >= -1e-8);
            }
            let direct = d1_pdf(&p, y.min(20.0), TOL).unwrap();
            assert!(direct >= -1e-8);
            y *= 10.0;
        }
    }

    #[test]
    fn d1_pdf_direct_matches_tabulated_slope() {
        let p = fig_params();
        let cache = KernelCache::new(p).unwrap();
        for y in [0.5, 1.0, 2.0] {
            let direct = d1_pdf(&p, y, TOL).unwrap();
            let interp = cache.d1_pdf(y);
            assert_relative_eq!(direct, interp, max_relative = 1e-4);
        }
    }

    #[test]
    fn cache_matches_direct_evaluation() {
        let p = fig_params();
        let cache = KernelCache::new(p).unwrap();
        for r in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0] {
            assert_relative_eq!(
                cache.upsilon(r),
                upsilon(&p, r, TOL).unwrap(),
                max_relative = 1e-7
            );
        }
        for y in [0.25, 1.0, 3.0, 10.0] {
            assert_abs_diff_eq!(cache.d1_cdf(y), d1_cdf(&p, y, TOL).unwrap(), epsilon = 1e-7);
        }
        assert_abs_diff_eq!(cache.lambda0(0.0, 1.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            cache.lambda0(1.5, 0.7).unwrap(),
            lambda0(&p, 1.5, 0.7, TOL).unwrap(),
            epsilon = 1e-7
        );
    }

    #[test]
    fn cache_quantile_inverts_cdf() {
        let cache = KernelCache::new(fig_params()).unwrap();
        for u in [0.05, 0.3, 0.5, 0.739901702094, 0.9, 0.99, 0.9999] {
            let y = cache.d1_quantile(u);
            assert_abs_diff_eq!(cache.d1_cdf(y), u, epsilon = 1e-6);
        }
        assert_eq!(cache.d1_quantile(0.0), 0.0);
    }

    #[test]
    fn deficit_averaged_scale_identity() {
        // ruin_prob(x) · ∫ W(z−y) α e^{−αy} dy = W(x+z) − W(x)
        let p = fig_params();
        let e1 = mean_per_unit(&p);
        for (x, z) in [(1.0, 1.0), (2.0, 0.5), (0.0, 2.0)] {
            let ruin = 1.0 - e1 * scale_w(&p, x);
            let lhs = ruin * deficit_averaged_scale(&p, z, TOL).unwrap();
            let rhs = scale_w(&p, x + z) - scale_w(&p, x);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-6);
        }
    }

    #[test]
    fn d1_cdf_monotone_grid() {
        let cache = KernelCache::new(fig_params()).unwrap();
        let mut prev = -1.0;
        for i in 0..=500 {
            let y = 0.05 * i as f64;
            let f = cache.d1_cdf(y);
            assert!(f >= prev - 1e-12);
            assert!((0.0..=1.0).contains(&f));
            prev = f;
        }
    }
}
