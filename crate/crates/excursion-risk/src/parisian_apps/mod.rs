//! Applications of the excursion machinery: the joint occupation-time /
//! longest-excursion law, peak-to-sum ruin, and counts of near-maximum
//! distress periods.
//!
//! All the series here condition on the geometric excursion count from a
//! zero initial surplus and treat the durations as i.i.d. `F_{D₁}`; the
//! occupation time in the red is their sum and the longest excursion their
//! maximum, so everything reduces to the joint sum/max law of
//! [`joint_grid`].

mod joint_grid;

pub use joint_grid::{
    f2_analytic, f2_cdf, f2_peak_region, joint_sum_max_pdf, nested_normalization, pdf_nested,
    GridSpec, JointGridDensity,
};

/// Absolute tolerance for the one-dimensional quantile-space integrals;
/// their integrands inherit interpolant kinks, which caps what adaptive
/// refinement can certify economically.
const U_SPACE_TOL: f64 = 1e-8;

use crate::error::{Error, Result};
use crate::excursion_laws::ruin_prob;
use crate::kernels::KernelCache;
use crate::numerics::integrate;
use crate::{SeriesResult, SERIES_TAIL_TOL};

/// Mass left outside the practical duration window used for grid series.
const GRID_MASS_TOL: f64 = 1e-10;

/// Nodes per axis for the internal graded series grids.
const SERIES_NODES: usize = 900;

fn pmf_zero_start(cache: &KernelCache, n: usize) -> f64 {
    let q = cache.params().ruin_prob_from_zero();
    if n == 0 {
        1.0 - q
    } else {
        (1.0 - q) * q.powi(n as i32)
    }
}

/// `F_N(l, r) = P(𝒪_∞ ≤ l, Ū_∞ ≤ r)` from a zero initial surplus: the
/// probability that the total time in the red never exceeds `l` while no
/// single excursion exceeds `r`; equivalently the probability that the
/// two-clock Parisian ruin time (cumulative budget `l`, single-excursion
/// budget `r`) is infinite.
///
/// Series over the excursion count: `P(τ₀⁻=∞) + Σ pmf(n) F_n(l, r)` with
/// `F_n` the sum/max joint CDF of `n` durations. Since the maximum never
/// exceeds the sum, `r` is clamped to `min(r, l)` on entry, making the
/// `r ≥ l` degeneracy `F_n(l, r) = F_n(l, l)` exact.
pub fn occupation_longest_joint_cdf(
    cache: &KernelCache,
    l: f64,
    r: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    if !(l > 0.0 && r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "occupation/longest arguments must be positive, got l={l}, r={r}"
        )));
    }
    let q = cache.params().ruin_prob_from_zero();
    let r_eff = r.min(l);
    let cap = cache.d1_quantile(1.0 - GRID_MASS_TOL);

    let mut value = pmf_zero_start(cache, 0);
    // n = 1: F_1(l, r) = F(min(l, r))
    value += pmf_zero_start(cache, 1) * cache.d1_cdf(r_eff);

    // levels where the sum constraint cannot bind (`l ≥ n·cap`) reduce to
    // F(r)ⁿ; level 2 is one-dimensional; the rest query the grid chain
    let analytic_hold = |n: usize| l >= n as f64 * cap;
    if n_max >= 2 {
        let f_2 = if analytic_hold(2) {
            cache.d1_cdf(r_eff).powi(2)
        } else {
            f2_cdf(cache, l, r_eff, U_SPACE_TOL)?
        };
        value += pmf_zero_start(cache, 2) * f_2;
    }
    let needs_grid = (3..=n_max).any(|n| !analytic_hold(n));
    let mut grid_terms: Vec<(usize, f64)> = Vec::new();
    if needs_grid && n_max >= 3 {
        let l_w = l.min(n_max as f64 * cap);
        let r_w = r_eff.min(cap).max(l_w / n_max as f64);
        joint_grid::run_chain(cache, l_w, r_w, SERIES_NODES, SERIES_NODES, n_max, |g| {
            if !analytic_hold(g.n) {
                grid_terms.push((g.n, g.cdf(l, r_eff)));
            }
        });
    }
    let grid_lookup: std::collections::HashMap<usize, f64> = grid_terms.into_iter().collect();

    for n in 3..=n_max {
        let f_n = if analytic_hold(n) {
            // the sum cannot reach l, only the max constraint is active
            cache.d1_cdf(r_eff).powi(n as i32)
        } else {
            grid_lookup.get(&n).copied().unwrap_or(0.0).clamp(0.0, 1.0)
        };
        value += pmf_zero_start(cache, n) * f_n;
    }

    let tail_bound = q.powi(n_max as i32 + 1);
    if tail_bound >= SERIES_TAIL_TOL {
        log::warn!(
            "occupation/longest series tail bound {tail_bound:.3e} above {SERIES_TAIL_TOL:.0e} at n_max={n_max}"
        );
    }
    Ok(SeriesResult { value: value.clamp(0.0, 1.0), tail_bound, terms: n_max })
}

/// `P(ζ < ∞)` for the peak-to-sum Parisian rule from a zero initial
/// surplus: ruin is declared when some excursion is both longer than `r`
/// and larger than `ratio` times the total time in the red,
/// `Σ pmf(n) P(max > ratio·sum, max > r)`.
///
/// Strict inequalities: for `n = 1` the ratio is identically one, so the
/// boundary `ratio = 1` contributes nothing from the first level. For
/// `ratio ≤ 1/n` the ratio constraint is implied by `max ≥ sum/n` and the
/// level reduces to `1 − F(r)ⁿ` exactly.
pub fn peak_to_sum_ruin_prob(
    cache: &KernelCache,
    ratio: f64,
    r: f64,
    n_max: usize,
) -> Result<SeriesResult> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "peak-to-sum ratio must lie in (0, 1], got {ratio}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("delay must be > 0, got {r}")));
    }
    let q = cache.params().ruin_prob_from_zero();
    let cap = cache.d1_quantile(1.0 - GRID_MASS_TOL);
    let sf_r = cache.d1_sf(r);

    // n = 1: R_1 ≡ 1, the event needs 1 > ratio strictly
    let mut value = if ratio < 1.0 { pmf_zero_start(cache, 1) * sf_r } else { 0.0 };

    // ratio ≤ 1/n is implied by max ≥ sum/n and the level reduces to the
    // longest-excursion tail; level 2 is one-dimensional
    let analytic_hold = |n: usize| ratio <= 1.0 / n as f64;
    if n_max >= 2 {
        let p_2 = if analytic_hold(2) {
            1.0 - cache.d1_cdf(r).powi(2)
        } else {
            f2_peak_region(cache, ratio, r, U_SPACE_TOL)?
        };
        value += pmf_zero_start(cache, 2) * p_2;
    }
    let needs_grid = (3..=n_max).any(|n| !analytic_hold(n));
    let mut grid_terms: Vec<(usize, f64)> = Vec::new();
    if needs_grid && n_max >= 3 {
        // the event region needs max > ratio·sum, and max ≤ cap a.s., so
        // sums beyond cap/ratio cannot contribute
        let l_w = (n_max as f64 * cap).min(cap / ratio);
        let r_w = cap.min(l_w);
        joint_grid::run_chain(cache, l_w, r_w, SERIES_NODES, SERIES_NODES, n_max, |g| {
            if !analytic_hold(g.n) {
                grid_terms.push((g.n, g.peak_region(ratio, r)));
            }
        });
    }
    let grid_lookup: std::collections::HashMap<usize, f64> = grid_terms.into_iter().collect();

    for n in 3..=n_max {
        let p_n = if analytic_hold(n) {
            1.0 - cache.d1_cdf(r).powi(n as i32)
        } else {
            grid_lookup.get(&n).copied().unwrap_or(0.0).clamp(0.0, 1.0)
        };
        value += pmf_zero_start(cache, n) * p_n;
    }

    let tail_bound = q.powi(n_max as i32 + 1);
    if tail_bound >= SERIES_TAIL_TOL {
        log::warn!(
            "peak-to-sum series tail bound {tail_bound:.3e} above {SERIES_TAIL_TOL:.0e} at n_max={n_max}"
        );
    }
    Ok(SeriesResult { value: value.clamp(0.0, 1.0), tail_bound, terms: n_max })
}

/// Proximity window for near-maximum distress counts: excursions with
/// duration in `(Ū_∞ − a, Ū_∞]` are counted.
#[derive(Debug, Clone, Copy)]
pub struct NearMaxSpec {
    pub a: f64,
    pub x: f64,
}

impl NearMaxSpec {
    pub fn new(a: f64, x: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("window must be > 0, got {a}")));
        }
        Ok(Self { a, x })
    }
}

fn pgf_derivative(cache: &KernelCache, x: f64, u: f64) -> f64 {
    // h(s) = E_x[s^{N_∞}] is geometric; h'(u) = p_x (1−q)/(1 − q u)²
    let p = cache.params();
    let px = ruin_prob(p, x);
    let q = p.ruin_prob_from_zero();
    let d = 1.0 - q * u;
    px * (1.0 - q) / (d * d)
}

/// Transform `E[s^{𝓔_a} 1{N_∞ ≥ 1}]`, the probability generating function
/// of the near-maximum count restricted to paths that ruin at all
/// (`𝓔_a ≥ 1` there). The full p.g.f. adds the `N_∞ = 0` atom:
/// `E[s^{𝓔_a}] = P_x(τ₀⁻ = ∞) + near_max_pgf(s)`.
///
/// Evaluated in the quantile variable `u = F_{D₁}(y)`, which removes the
/// density from the integrand:
/// `s ∫₀¹ h'(F(Q(u)−a) + s(u − F(Q(u)−a))) du`.
pub fn near_max_pgf(cache: &KernelCache, spec: &NearMaxSpec, s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("pgf argument must lie in [0,1), got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let g = |u: f64| {
        let below = cache.d1_cdf(cache.d1_quantile(u) - spec.a);
        pgf_derivative(cache, spec.x, below + s * (u - below).max(0.0))
    };
    let q = integrate(g, 0.0, 1.0, U_SPACE_TOL)?;
    Ok(s * q.value)
}

/// Expected number of near-maximum distress periods,
/// `E[𝓔_a] = ∫ h'(F(y+a)) f(y) dy = ∫₀¹ h'(F(Q(u)+a)) du`.
pub fn near_max_mean(cache: &KernelCache, spec: &NearMaxSpec) -> Result<f64> {
    let g = |u: f64| pgf_derivative(cache, spec.x, cache.d1_cdf(cache.d1_quantile(u) + spec.a));
    let q = integrate(g, 0.0, 1.0, U_SPACE_TOL)?;
    Ok(q.value.max(0.0))
}

#[doc(hidden)]
pub fn debug_chain_masses(
    cache: &KernelCache,
    l_max: f64,
    r_max: f64,
    nl: usize,
    nr: usize,
    n_top: usize,
) -> Vec<(usize, f64)> {
    joint_grid::run_chain(cache, l_max, r_max, nl, nr, n_top, |g| (g.n, g.norm()))
}

#[doc(hidden)]
pub fn debug_peak_regions(
    cache: &KernelCache,
    ratio: f64,
    r: f64,
    nodes: usize,
    n_top: usize,
) -> Vec<(usize, f64)> {
    let cap = cache.d1_quantile(1.0 - GRID_MASS_TOL);
    let l_w = (n_top as f64 * cap).min(cap / ratio);
    joint_grid::run_chain(cache, l_w, cap.min(l_w), nodes, nodes, n_top, |g| {
        (g.n, g.peak_region(ratio, r))
    })
}

#[doc(hidden)]
pub fn debug_occupation_cdfs(
    cache: &KernelCache,
    l: f64,
    r: f64,
    nodes: usize,
    n_top: usize,
) -> Vec<(usize, f64)> {
    joint_grid::run_chain(cache, l, r.min(l), nodes, nodes, n_top, |g| (g.n, g.cdf(l, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cl_model::ClParams;
    use crate::excursion_laws::{series_terms_for_tail, ExcursionLawContext};
    use crate::mc_oracle::{estimate_many, Functional, SimConfig};
    use approx::assert_abs_diff_eq;
    use std::sync::{Arc, OnceLock};

    fn fig_params() -> ClParams {
        ClParams::new(5.5, 2.0, 0.5).unwrap()
    }

    fn cache() -> Arc<KernelCache> {
        static C: OnceLock<Arc<KernelCache>> = OnceLock::new();
        Arc::clone(C.get_or_init(|| Arc::new(KernelCache::new(fig_params()).unwrap())))
    }

    fn n_max() -> usize {
        series_terms_for_tail(&fig_params(), 0.0, 1e-11)
    }

    #[test]
    fn occupation_certain_event_limit() {
        let k = cache();
        let res = occupation_longest_joint_cdf(&k, 1e6, 1e6, n_max()).unwrap();
        assert!(res.converged());
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn occupation_degenerate_r_above_l() {
        let k = cache();
        // max ≤ sum always, so r ≥ l collapses to r = l
        let a = occupation_longest_joint_cdf(&k, 3.0, 10.0, 40).unwrap().value;
        let b = occupation_longest_joint_cdf(&k, 3.0, 3.0, 40).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn occupation_monotone_in_both_arguments() {
        let k = cache();
        let grid = [0.5, 1.0, 2.0, 4.0];
        for (i, &l) in grid.iter().enumerate() {
            for &r in &grid {
                let v = occupation_longest_joint_cdf(&k, l, r, 60).unwrap().value;
                if i > 0 {
                    let v_smaller =
                        occupation_longest_joint_cdf(&k, grid[i - 1], r, 60).unwrap().value;
                    assert!(v_smaller <= v + 1e-9);
                }
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn occupation_marginal_in_l_matches_mc() {
        // r -> ∞ leaves the occupation-time marginal P(𝒪_∞ ≤ l)
        let k = cache();
        let l = 3.0;
        let v = occupation_longest_joint_cdf(&k, l, 1e9, n_max()).unwrap().value;
        let cfg = SimConfig::new(fig_params(), 0.0, 31, 150_000).unwrap();
        let est =
            estimate_many(&cfg, &[Functional::OccupationJoint { l, r: f64::INFINITY }])[0];
        assert!(est.z_score(v) < 4.0, "z = {}", est.z_score(v));
    }

    #[test]
    fn occupation_interior_point_matches_mc() {
        let k = cache();
        let v = occupation_longest_joint_cdf(&k, 3.0, 1.0, n_max()).unwrap().value;
        let cfg = SimConfig::new(fig_params(), 0.0, 32, 150_000).unwrap();
        let est = estimate_many(&cfg, &[Functional::OccupationJoint { l: 3.0, r: 1.0 }])[0];
        assert!(est.z_score(v) < 4.0, "closed {v} vs mc {} z={}", est.value, est.z_score(v));
    }

    #[test]
    fn peak_to_sum_boundary_cases() {
        let k = cache();
        // ratio = 1: only a single excursion can satisfy R_n = 1, and the
        // strict inequality kills it; higher levels need max > sum which is
        // impossible — the whole series is 0
        let res = peak_to_sum_ruin_prob(&k, 1.0, 1.0, 60).unwrap();
        assert_abs_diff_eq!(res.value, 0.0, epsilon = 1e-12);
        // ratio -> 0 reduces to the longest-excursion tail with ruin
        let ctx = ExcursionLawContext::new(cache(), 0.0);
        let want =
            ctx.ruin_prob() - (ctx.longest_cdf_inf(1.0).unwrap() - (1.0 - ctx.ruin_prob()));
        let res = peak_to_sum_ruin_prob(&k, 1e-3, 1.0, n_max()).unwrap();
        assert_abs_diff_eq!(res.value, want, epsilon = 2e-3);
    }

    #[test]
    fn peak_to_sum_interior_matches_mc() {
        let k = cache();
        let v = peak_to_sum_ruin_prob(&k, 0.6, 1.0, n_max()).unwrap().value;
        let cfg = SimConfig::new(fig_params(), 0.0, 33, 150_000).unwrap();
        let est = estimate_many(&cfg, &[Functional::PeakToSum { ratio: 0.6, r: 1.0 }])[0];
        assert!(est.z_score(v) < 4.0, "closed {v} vs mc {} z={}", est.value, est.z_score(v));
    }

    #[test]
    fn peak_to_sum_monotone_in_ratio() {
        // a larger ratio is a stricter event
        let k = cache();
        let mut prev = 1.0;
        for ratio in [0.2, 0.4, 0.6, 0.8, 0.99] {
            let v = peak_to_sum_ruin_prob(&k, ratio, 0.5, 60).unwrap().value;
            assert!(v <= prev + 1e-9, "ratio {ratio}");
            prev = v;
        }
    }

    #[test]
    fn near_max_small_window_identity() {
        // a -> 0+: E[𝓔_{0+}] = ∫₀¹ h'(u) du = h(1) − h(0) = P_x(N ≥ 1)
        let k = cache();
        let spec = NearMaxSpec::new(1e-6, 1.0).unwrap();
        let mean = near_max_mean(&k, &spec).unwrap();
        let want = ruin_prob(&fig_params(), 1.0);
        assert_abs_diff_eq!(mean, want, epsilon = 1e-4);
    }

    #[test]
    fn near_max_mean_monotone_in_window() {
        let k = cache();
        let mut prev = 0.0;
        for a in [0.1, 0.25, 0.5, 1.0, 2.0] {
            let m = near_max_mean(&k, &NearMaxSpec::new(a, 1.0).unwrap()).unwrap();
            assert!(m >= prev - 1e-10, "a = {a}");
            prev = m;
        }
    }

    #[test]
    fn near_max_pgf_properties() {
        let k = cache();
        let spec = NearMaxSpec::new(0.5, 1.0).unwrap();
        assert_eq!(near_max_pgf(&k, &spec, 0.0).unwrap(), 0.0);
        // nondecreasing and convex on a grid of s
        let vals: Vec<f64> = (1..=9)
            .map(|i| near_max_pgf(&k, &spec, i as f64 * 0.1).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for w in vals.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9, "convexity");
        }
        // s -> 1⁻ recovers the restricted mass P_x(N ≥ 1)
        let near_one = near_max_pgf(&k, &spec, 1.0 - 1e-8).unwrap();
        let px = ruin_prob(&fig_params(), 1.0);
        assert!(near_one >= px - 1e-4 && near_one <= 1.0, "got {near_one} vs {px}");
    }

    #[test]
    fn near_max_mean_matches_mc() {
        let k = cache();
        let spec = NearMaxSpec::new(0.5, 1.0).unwrap();
        let mean = near_max_mean(&k, &spec).unwrap();
        let cfg = SimConfig::new(fig_params(), 1.0, 34, 150_000).unwrap();
        let est = estimate_many(&cfg, &[Functional::NearMaxCount { a: 0.5 }])[0];
        assert!(est.z_score(mean) < 4.0, "closed {mean} vs mc {} z={}", est.value, est.z_score(mean));
    }

    #[test]
    fn near_max_rejects_bad_window() {
        assert!(NearMaxSpec::new(0.0, 1.0).is_err());
        assert!(NearMaxSpec::new(-1.0, 0.0).is_err());
    }
}
