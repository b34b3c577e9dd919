//! First passage above a level observed only at Poisson epochs, raced
//! against continuously monitored ruin, and the law of the longest
//! excursion up to that observed passage.
//!
//! With observation rate `ω` and level `b ≥ x ≥ 0`:
//!
//! - passage before ruin: `P_x(T_b⁺ < τ₀⁻) = ω W(x) / (Φ_ω Z(b, Φ_ω))`;
//! - the position observed at the passage is `b` plus an `Exp(Φ_ω)`
//!   overshoot, which is what makes the complementary mass computable by a
//!   single exponential-tail integral;
//! - on `{τ₀⁻ < T_b⁺}` the deficit at ruin is `Exp(α)` independent of the
//!   race (memoryless claims), so the ruin-first law is a scalar mass times
//!   the exponential law;
//! - the longest-excursion law at `T_b⁺` is the geometric-trials series in
//!   which each round is a fresh race from zero and each completed
//!   excursion contributes a factor `F_{D₁}(r)`.

use std::sync::Arc;

use crate::cl_model::{phi, scale_w, z_theta, ClParams};
use crate::error::{Error, Result};
use crate::excursion_laws::ruin_prob;
use crate::kernels::KernelCache;
use crate::numerics::integrate_to_inf;
use crate::{SeriesResult, SERIES_TAIL_TOL};

/// The (defective) law of the deficit at ruin on `{τ₀⁻ < T_b⁺}`:
/// `total_mass · Exp(rate)`.
#[derive(Debug, Clone, Copy)]
pub struct DeficitLaw {
    /// `P_x(τ₀⁻ < T_b⁺)`.
    pub total_mass: f64,
    /// Exponential rate of the deficit given the event (the claim rate).
    pub rate: f64,
}

/// Context for the Poisson-observation quantities.
#[derive(Debug, Clone)]
pub struct PoissonObsContext {
    kernels: Arc<KernelCache>,
    x: f64,
    b: f64,
    obs_rate: f64,
}

impl PoissonObsContext {
    pub fn new(kernels: Arc<KernelCache>, x: f64, b: f64, obs_rate: f64) -> Result<Self> {
        if !(obs_rate > 0.0 && obs_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "observation rate must be > 0, got {obs_rate}"
            )));
        }
        if b < x {
            return Err(Error::InvalidArgument(format!(
                "observation level b={b} must be at least the initial surplus x={x}"
            )));
        }
        if x < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "initial surplus must be nonnegative, got {x}"
            )));
        }
        Ok(Self { kernels, x, b, obs_rate })
    }

    pub fn for_params(params: ClParams, x: f64, b: f64, obs_rate: f64) -> Result<Self> {
        Self::new(Arc::new(KernelCache::new(params)?), x, b, obs_rate)
    }

    pub fn params(&self) -> &ClParams {
        self.kernels.params()
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn obs_rate(&self) -> f64 {
        self.obs_rate
    }

    /// `P_x(T_b⁺ < τ₀⁻) = ω W(x) / (Φ_ω Z(b, Φ_ω))`.
    pub fn passage_before_ruin(&self) -> f64 {
        passage_before_ruin_from(self.params(), self.x, self.b, self.obs_rate)
    }

    /// `P_x(τ₀⁻ < T_b⁺)` together with the deficit law on that event.
    ///
    /// The mass subtracts, from the classical ruin probability, the paths
    /// that are first observed above `b` and only then ruin:
    /// `P_x(τ₀⁻ < T_b⁺) = P_x(τ₀⁻<∞) − ∫_b^∞ g(z) P_z(τ₀⁻<∞) dz`, where
    /// `g` is the density of the observed position on `{T_b⁺ < τ₀⁻}`.
    pub fn ruin_deficit_law_before_passage(&self) -> Result<DeficitLaw> {
        let p = self.params();
        let theta = phi(p, self.obs_rate);
        let z_b = z_theta(p, self.b, theta);
        let w_x = scale_w(p, self.x);
        // g(z) = ω W(x) e^{−Φ(z−b)} / Z(b, Φ) on (b, ∞)
        let scale = self.obs_rate * w_x / z_b;
        let q = integrate_to_inf(
            |z| (-theta * (z - self.b)).exp() * ruin_prob(p, z),
            self.b,
            self.kernels.tolerance(),
        )?;
        let mass = (ruin_prob(p, self.x) - scale * q.value).clamp(0.0, 1.0);
        Ok(DeficitLaw { total_mass: mass, rate: p.alpha() })
    }

    /// `P_x(Ū_{T_b⁺} < r)`: no excursion before the observed passage, or
    /// `n ≥ 1` completed excursions all shorter than `r` followed by a
    /// from-zero race won by the observation.
    ///
    /// Truncated geometric series; the exact tail bound is reported.
    pub fn longest_cdf_at_passage(&self, r: f64, n_max: usize) -> Result<SeriesResult> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("delay must be > 0, got {r}")));
        }
        let pass_x = self.passage_before_ruin();
        let ruin_x = self.ruin_deficit_law_before_passage()?.total_mass;
        let from_zero = self.at_zero()?;
        let pass_0 = from_zero.passage_before_ruin();
        let ruin_0 = from_zero.ruin_deficit_law_before_passage()?.total_mass;
        let f_r = self.kernels.d1_cdf(r);

        let mut value = pass_x;
        let mut term = ruin_x * f_r * pass_0; // n = 1
        let ratio = ruin_0 * f_r;
        let mut terms = 0;
        for n in 1..=n_max {
            debug_assert!((0.0..=1.0).contains(&term) || term.abs() < 1e-12);
            value += term;
            term *= ratio;
            terms = n;
        }
        // Σ_{n>N} ruin_x f pass_0 (ruin_0 f)^{n-1} = term_{N+1}/(1 − ratio)
        let tail_bound = term / (1.0 - ratio).max(1e-12);
        if tail_bound >= SERIES_TAIL_TOL {
            log::warn!(
                "poisson longest series tail bound {tail_bound:.3e} above {SERIES_TAIL_TOL:.0e} at n_max={n_max}"
            );
        }
        Ok(SeriesResult { value: value.clamp(0.0, 1.0), tail_bound, terms })
    }

    fn at_zero(&self) -> Result<Self> {
        Ok(Self {
            kernels: Arc::clone(&self.kernels),
            x: 0.0,
            b: self.b,
            obs_rate: self.obs_rate,
        })
    }
}

/// Free-function form of the passage probability (used by sweeps).
pub fn passage_before_ruin_from(p: &ClParams, x: f64, b: f64, obs_rate: f64) -> f64 {
    let theta = phi(p, obs_rate);
    let v = obs_rate * scale_w(p, x) / (theta * z_theta(p, b, theta));
    v.clamp(0.0, 1.0)
}
