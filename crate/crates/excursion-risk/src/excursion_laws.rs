//! Closed-form laws of the negative excursions over an infinite horizon:
//! the excursion count `N_∞`, longest and shortest durations, their joint
//! law, the Parisian ruin probability, and the range.
//!
//! Everything reduces to three ingredients — `W(x)`, `Υ(r)`, `Λ(x, r)` —
//! combined through the geometric-trials structure: from any start the
//! number of excursions is geometric, and the durations are i.i.d. with
//! CDF `F_{D₁}` thanks to the memoryless exponential deficit.

use std::sync::Arc;

use crate::cl_model::{mean_per_unit, scale_w, ClParams};
use crate::error::{Error, Result};
use crate::kernels::KernelCache;
use crate::{SeriesResult, SERIES_TAIL_TOL};

/// Clamp tolerance: closed forms may exit `[0,1]` by quadrature noise;
/// beyond this the clamp is logged as a warning because it points at a bug
/// rather than rounding.
const CLAMP_WARN: f64 = 1e-8;

fn clamp_prob(v: f64, what: &str) -> f64 {
    if v < -CLAMP_WARN || v > 1.0 + CLAMP_WARN {
        log::warn!("{what} left [0,1] by more than {CLAMP_WARN}: {v}");
    }
    v.clamp(0.0, 1.0)
}

/// Evaluation context: parameters, initial surplus, shared kernel cache.
///
/// Immutable; clone freely (the cache is shared behind an `Arc`).
#[derive(Debug, Clone)]
pub struct ExcursionLawContext {
    kernels: Arc<KernelCache>,
    x: f64,
}

impl ExcursionLawContext {
    pub fn new(kernels: Arc<KernelCache>, x: f64) -> Self {
        Self { kernels, x }
    }

    /// Build a context with a fresh cache for `params`.
    pub fn for_params(params: ClParams, x: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(KernelCache::new(params)?), x))
    }

    pub fn params(&self) -> &ClParams {
        self.kernels.params()
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn kernels(&self) -> &KernelCache {
        &self.kernels
    }

    /// Classical ruin probability `P_x(τ₀⁻ < ∞) = 1 − E[X₁] W(x)`.
    ///
    /// For `x ≥ 0` this is `(η/(cα)) e^{−(α−η/c)x}` exactly, which is the
    /// form evaluated here (no cancellation for large `x`).
    pub fn ruin_prob(&self) -> f64 {
        ruin_prob(self.params(), self.x)
    }

    /// P.m.f. of the total excursion count `N_∞`.
    pub fn n_infty_pmf(&self, n: usize) -> f64 {
        let p = self.params();
        let px = self.ruin_prob();
        let q = ruin_prob(p, 0.0);
        if n == 0 {
            1.0 - px
        } else {
            (1.0 - q) * px * q.powi(n as i32 - 1)
        }
    }

    /// `P_x(Ū_∞ < r) = E[X₁] Λ(x, r)/Υ(r)`.
    pub fn longest_cdf_inf(&self, r: f64) -> Result<f64> {
        let p = self.params();
        let ups = self.kernels.upsilon(r);
        let lam = self.kernels.lambda0(self.x, r)?;
        Ok(clamp_prob(mean_per_unit(p) * lam / ups, "longest_cdf_inf"))
    }

    /// Parisian ruin probability with delay `r`: the survival function of
    /// the longest excursion, `1 − P_x(Ū_∞ < r)` (same code path, so the
    /// complement identity is exact).
    pub fn parisian_ruin_prob(&self, r: f64) -> Result<f64> {
        Ok(1.0 - self.longest_cdf_inf(r)?)
    }

    /// `P_x(Ū_{τ_b⁺} < r) = Λ(x, r)/Λ(b, r)` for `b ≥ x`.
    pub fn longest_cdf_at_first_passage(&self, b: f64, r: f64) -> Result<f64> {
        if b < self.x {
            return Err(Error::InvalidArgument(format!(
                "passage level b={b} must be at least the initial surplus x={}",
                self.x
            )));
        }
        let num = self.kernels.lambda0(self.x, r)?;
        let den = self.kernels.lambda0(b, r)?;
        Ok(clamp_prob(num / den, "longest_cdf_at_first_passage"))
    }

    /// `P_x(U̲_∞ > r, τ₀⁻ < ∞)`: the shortest excursion exceeds `r` and
    /// ruin happens at all.
    pub fn shortest_tail_inf(&self, r: f64) -> Result<f64> {
        let p = self.params();
        let e1 = mean_per_unit(p);
        let w0 = scale_w(p, 0.0);
        let wx = scale_w(p, self.x);
        let ups = self.kernels.upsilon(r);
        let lam = self.kernels.lambda0(self.x, r)?;
        let num = 1.0 - wx * (e1 - ups) - lam;
        let den = 1.0 - w0 * (ups - e1);
        let v = w0 * e1 * num / den;
        Ok(clamp_prob(v, "shortest_tail_inf").min(self.ruin_prob()))
    }

    /// Joint CDF `P_x(U̲_∞ ≤ u, Ū_∞ ≤ v, τ₀⁻ < ∞)` for `0 < u ≤ v`.
    pub fn joint_cdf_inf(&self, u: f64, v: f64) -> Result<f64> {
        if u > v {
            return Err(Error::InvalidArgument(format!(
                "joint CDF needs u ≤ v, got u={u}, v={v}"
            )));
        }
        let p = self.params();
        let e1 = mean_per_unit(p);
        let w0 = scale_w(p, 0.0);
        let wx = scale_w(p, self.x);
        let ups_u = self.kernels.upsilon(u);
        let ups_v = self.kernels.upsilon(v);
        let lam_u = self.kernels.lambda0(self.x, u)?;
        let lam_v = self.kernels.lambda0(self.x, v)?;

        let whole = e1 * (lam_v / ups_v - wx);
        let survival_num = lam_v - lam_u - wx * (ups_v - ups_u);
        let survival = e1 * w0 * survival_num / (1.0 + w0 * (ups_v - ups_u));
        Ok(clamp_prob(whole - survival, "joint_cdf_inf"))
    }

    /// `P(ℛ_∞ < r, τ₀⁻ < ∞)` at `x = 0`: the range of the excursion
    /// durations stays below `r`.
    ///
    /// The derivation treats all durations as sharing `F_{D₁}`, which for a
    /// first excursion started from a nonzero surplus is a modelling choice
    /// the series does not cover; the context must therefore sit at
    /// `x = 0`.
    ///
    /// Series over the excursion count, truncated at `n_max` with the exact
    /// geometric tail bound reported in the result.
    pub fn range_cdf(&self, r: f64, n_max: usize) -> Result<SeriesResult> {
        self.require_zero_start("range_cdf")?;
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("range delay must be > 0, got {r}")));
        }
        let q = ruin_prob(self.params(), 0.0);
        let mut value = 0.0;
        let mut terms = 0;
        for n in 1..=n_max {
            let pmf = self.n_infty_pmf(n);
            let inner = if n == 1 { 1.0 } else { self.range_inner_integral(r, n)? };
            value += pmf * inner;
            terms = n;
        }
        let tail_bound = self.ruin_prob() * q.powi(n_max as i32);
        if tail_bound >= SERIES_TAIL_TOL {
            log::warn!("range_cdf series tail bound {tail_bound:.3e} above {SERIES_TAIL_TOL:.0e} at n_max={n_max}");
        }
        Ok(SeriesResult { value: clamp_prob(value, "range_cdf"), tail_bound, terms })
    }

    /// `n ∫ f(y) (F(y+r) − F(y))^{n−1} dy`, evaluated in the `u = F(y)`
    /// variable so the density never appears and the integrand lives on
    /// `(0, 1)`:
    /// `n ∫₀¹ (F(Q(u)+r) − u)^{n−1} du`.
    fn range_inner_integral(&self, r: f64, n: usize) -> Result<f64> {
        debug_assert!(n >= 2);
        let k = &self.kernels;
        let g = |u: f64| (k.d1_cdf(k.d1_quantile(u) + r) - u).max(0.0).powi(n as i32 - 1);
        // the integrand inherits interpolant kinks; 1e-8 is all the rule
        // can certify without chasing every node
        let q = crate::numerics::integrate(g, 0.0, 1.0, 1e-8)?;
        Ok((n as f64 * q.value).clamp(0.0, 1.0))
    }

    fn require_zero_start(&self, what: &str) -> Result<()> {
        if self.x != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{what} is defined for a zero initial surplus; got x={} \
                 (the i.i.d.-duration series does not cover other starts)",
                self.x
            )));
        }
        Ok(())
    }
}

/// Classical ruin probability `P_x(τ₀⁻ < ∞)`.
pub fn ruin_prob(p: &ClParams, x: f64) -> f64 {
    if x < 0.0 {
        return 1.0;
    }
    p.ruin_prob_from_zero() * (-p.adjustment_coeff() * x).exp()
}

/// Number of series terms needed for a geometric tail below `tol` starting
/// from surplus `x`.
pub fn series_terms_for_tail(p: &ClParams, x: f64, tol: f64) -> usize {
    let q = ruin_prob(p, 0.0);
    let px = ruin_prob(p, x);
    if px <= tol {
        return 1;
    }
    ((tol / px).ln() / q.ln()).ceil().max(1.0) as usize
}
