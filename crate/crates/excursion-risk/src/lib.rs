//! Closed-form distributions of negative excursions of the Cramér–Lundberg
//! surplus process with exponential claims, together with an exact
//! event-driven Monte Carlo simulator that serves as the independent oracle
//! for every formula.
//!
//! The surplus is `X_t = x + c·t − Σ_{i≤N_t} C_i` with claim arrivals
//! Poisson(`eta`) and claim sizes `Exp(alpha)`, under the net-profit
//! condition `c − eta/alpha > 0`. A negative excursion is a maximal stretch
//! of time the surplus spends strictly below zero; its durations
//! `D₁, D₂, …` drive everything here:
//!
//! - law of the longest and shortest excursion over an infinite horizon,
//!   at first passage of a barrier, and at Poisson observation times;
//! - Parisian ruin probabilities (the complement of the longest-excursion
//!   law);
//! - the joint law of shortest and longest, and of their difference (the
//!   range);
//! - joint occupation-time/longest laws and peak-to-sum ruin;
//! - counts of near-maximum distress periods.
//!
//! Module map: [`cl_model`] holds the model primitives (`ψ`, `Φ_q`, `W`,
//! `Z`, the transition law of `X_r`); [`kernels`] the `Υ`/`Λ` kernels and
//! the single-excursion law; [`excursion_laws`] the closed-form excursion
//! distributions; [`poisson_obs`] the Poisson-observation variants;
//! [`parisian_apps`] the joint sum/max recursion and its applications;
//! [`mc_oracle`] the simulator; [`validate`] the closed-form-vs-simulation
//! cross-check suite used by the CLI.

pub mod cl_model;
pub mod error;
pub mod excursion_laws;
pub mod kernels;
pub mod mc_oracle;
pub mod numerics;
pub mod parisian_apps;
pub mod poisson_obs;
pub mod validate;

pub use cl_model::ClParams;
pub use error::{Error, Result};

/// A truncated series value together with its (closed-form) tail bound.
///
/// The geometric-trials expansions are infinite series whose tails are
/// bounded exactly by the geometric excursion-count tail; callers decide
/// whether a given bound is acceptable ([`SeriesResult::converged`]).
#[derive(Debug, Clone, Copy)]
pub struct SeriesResult {
    /// Truncated series value (already clamped where the contract says so).
    pub value: f64,
    /// Upper bound on the neglected tail.
    pub tail_bound: f64,
    /// Number of series terms evaluated.
    pub terms: usize,
}

/// Tail bound below which a truncated series is reported as converged.
pub const SERIES_TAIL_TOL: f64 = 1e-10;

impl SeriesResult {
    pub fn converged(&self) -> bool {
        self.tail_bound < SERIES_TAIL_TOL
    }
}
