//! Cross-validation of the closed forms against the Monte Carlo oracle:
//! one simulation sweep per start level evaluates every paired functional
//! with common random numbers, and each pair is scored by its z-statistic.

use std::sync::Arc;

use crate::cl_model::{phi, ClParams};
use crate::error::Result;
use crate::excursion_laws::{ruin_prob, series_terms_for_tail, ExcursionLawContext};
use crate::kernels::{deficit_averaged_scale, KernelCache};
use crate::mc_oracle::{
    estimate_many, estimate_passage_laplace, Functional, McEstimate, SimConfig,
};
use crate::parisian_apps::{near_max_mean, occupation_longest_joint_cdf, peak_to_sum_ruin_prob,
    NearMaxSpec};
use crate::poisson_obs::PoissonObsContext;

/// One closed-form/Monte-Carlo pair.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub closed_form: f64,
    pub mc: McEstimate,
}

impl CheckResult {
    pub fn z(&self) -> f64 {
        self.mc.z_score(self.closed_form)
    }

    /// Agreement at the three-standard-error level (plus the reported
    /// barrier bias allowance).
    pub fn passes(&self) -> bool {
        (self.closed_form - self.mc.value).abs()
            <= 3.0 * self.mc.std_error + self.mc.bias_bound
    }
}

/// Knobs for one validation run.
#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub params: ClParams,
    pub x: f64,
    pub seed: u64,
    pub n_paths: u64,
    /// Observation level for the Poisson checks (defaults to `x + 2`).
    pub obs_level: f64,
    pub obs_rate: f64,
}

impl ValidationConfig {
    pub fn new(params: ClParams, x: f64, seed: u64, n_paths: u64) -> Self {
        Self { params, x, seed, n_paths, obs_level: x + 2.0, obs_rate: 1.0 }
    }
}

/// Run the full suite. Covers the infinite-horizon laws at `x`, the
/// zero-start series laws, the Poisson-observation race, the passage-time
/// Laplace transform, and the scale-function identity at ruin.
pub fn run_validation(cfg: &ValidationConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let cache = Arc::new(KernelCache::new(cfg.params)?);
    let ctx = ExcursionLawContext::new(Arc::clone(&cache), cfg.x);
    let p = &cfg.params;

    // --- infinite-horizon laws from x, one common-random-numbers sweep ---
    let sim = SimConfig::new(*p, cfg.x, cfg.seed, cfg.n_paths)?;
    let rs = [0.5, 1.0, 2.0];
    let mut fns = vec![Functional::Ruin];
    let mut names = vec!["ruin".to_string()];
    let mut vals = vec![ctx.ruin_prob()];
    for r in rs {
        fns.push(Functional::LongestCdf { r });
        names.push(format!("longest_cdf(r={r})"));
        vals.push(ctx.longest_cdf_inf(r)?);
        fns.push(Functional::ShortestTail { r });
        names.push(format!("shortest_tail(r={r})"));
        vals.push(ctx.shortest_tail_inf(r)?);
    }
    fns.push(Functional::JointCdf { u: 0.5, v: 2.0 });
    names.push("joint_cdf(u=0.5,v=2)".into());
    vals.push(ctx.joint_cdf_inf(0.5, 2.0)?);
    fns.push(Functional::NearMaxCount { a: 0.5 });
    names.push("near_max_mean(a=0.5)".into());
    vals.push(near_max_mean(&cache, &NearMaxSpec::new(0.5, cfg.x)?)?);
    fns.push(Functional::Id1Scale { z: 1.0 });
    names.push("scale_identity_at_ruin(z=1)".into());
    vals.push(deficit_averaged_scale(p, 1.0, cache.tolerance())? * ruin_prob(p, cfg.x));
    for n in 0..=5usize {
        fns.push(Functional::NInftyEquals { n });
        names.push(format!("n_infty_pmf({n})"));
        vals.push(ctx.n_infty_pmf(n));
    }
    for (est, (name, val)) in
        estimate_many(&sim, &fns).into_iter().zip(names.into_iter().zip(vals))
    {
        out.push(CheckResult { name, closed_form: val, mc: est });
    }

    // --- zero-start series laws -----------------------------------------
    let n_max = series_terms_for_tail(p, 0.0, 1e-11);
    let ctx0 = ExcursionLawContext::new(Arc::clone(&cache), 0.0);
    let sim0 = SimConfig::new(*p, 0.0, cfg.seed ^ 0x5eed, cfg.n_paths)?;
    let fns0 = vec![
        Functional::RangeCdf { r: 1.0 },
        Functional::OccupationJoint { l: 3.0, r: 1.0 },
        Functional::PeakToSum { ratio: 0.6, r: 1.0 },
    ];
    let vals0 = vec![
        ("range_cdf(r=1)", ctx0.range_cdf(1.0, n_max)?.value),
        ("occupation_longest(l=3,r=1)", occupation_longest_joint_cdf(&cache, 3.0, 1.0, n_max)?.value),
        ("peak_to_sum(ratio=0.6,r=1)", peak_to_sum_ruin_prob(&cache, 0.6, 1.0, n_max)?.value),
    ];
    for (est, (name, val)) in estimate_many(&sim0, &fns0).into_iter().zip(vals0) {
        out.push(CheckResult { name: name.into(), closed_form: val, mc: est });
    }

    // --- Poisson observation race ----------------------------------------
    let pctx = PoissonObsContext::new(
        Arc::clone(&cache),
        cfg.x.max(0.0),
        cfg.obs_level,
        cfg.obs_rate,
    )?;
    let simp = SimConfig::new(*p, cfg.x.max(0.0), cfg.seed ^ 0x0b5, cfg.n_paths)?
        .with_poisson_obs(cfg.obs_rate, cfg.obs_level);
    let fnsp = vec![Functional::PoissonPassage, Functional::PoissonLongestCdf { r: 1.0 }];
    let valsp = vec![
        (
            format!("poisson_passage(b={},rate={})", cfg.obs_level, cfg.obs_rate),
            pctx.passage_before_ruin(),
        ),
        (
            format!("poisson_longest(b={},rate={},r=1)", cfg.obs_level, cfg.obs_rate),
            pctx.longest_cdf_at_passage(1.0, n_max)?.value,
        ),
    ];
    for (est, (name, val)) in estimate_many(&simp, &fnsp).into_iter().zip(valsp) {
        out.push(CheckResult { name, closed_form: val, mc: est });
    }

    // --- first-passage Laplace transform ---------------------------------
    for q in [0.0, 0.5] {
        let b = 1.0;
        let x0 = 0.0;
        let mc =
            estimate_passage_laplace(p, x0, b, q, cfg.seed ^ 0x1a9, cfg.n_paths.min(200_000));
        let exact = (-phi(p, q) * (b - x0)).exp();
        out.push(CheckResult {
            name: format!("passage_laplace(q={q},b={b})"),
            closed_form: exact,
            mc,
        });
    }

    Ok(out)
}

/// Render one result line (fixed-width, CSV-friendly).
pub fn format_check(c: &CheckResult) -> String {
    format!(
        "{},{:.10},{:.10},{:.3e},{:.2},{}",
        c.name,
        c.closed_form,
        c.mc.value,
        c.mc.std_error,
        c.z(),
        if c.passes() { "pass" } else { "FAIL" }
    )
}

/// Header matching [`format_check`].
pub const CHECK_CSV_HEADER: &str = "check,closed_form,mc_value,mc_se,z,verdict";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_at_moderate_n() {
        let params = ClParams::new(5.5, 2.0, 0.5).unwrap();
        let cfg = ValidationConfig::new(params, 1.0, 7, 60_000);
        let results = run_validation(&cfg).unwrap();
        assert!(results.len() >= 15);
        let failures: Vec<_> =
            results.iter().filter(|c| !c.passes()).map(|c| format_check(c)).collect();
        assert!(failures.is_empty(), "failing checks:\n{}", failures.join("\n"));
    }
}
