//! The Cramér–Lundberg surplus process with exponential claims.
//!
//! `X_t = x + c·t − Σ_{i≤N_t} C_i` with `N` Poisson(`eta`) and claims
//! `C_i ~ Exp(alpha)`. Everything the fluctuation identities need — the
//! Laplace exponent `ψ`, its right inverse `Φ_q`, the scale function `W`,
//! the second scale function `Z(x, θ)`, and the one-step transition law of
//! `X_r` — is available in closed form for this model, so no transform
//! inversion appears anywhere.

use crate::error::{Error, Result};
use crate::numerics::bessel;

/// Parameters of the Cramér–Lundberg model with exponential claims.
///
/// Immutable after construction; construction enforces positivity and the
/// net-profit condition `c − eta/alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClParams {
    c: f64,
    eta: f64,
    alpha: f64,
}

impl ClParams {
    pub fn new(c: f64, eta: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("c", c), ("eta", eta), ("alpha", alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if c - eta / alpha <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "net-profit condition violated: c - eta/alpha = {} <= 0",
                c - eta / alpha
            )));
        }
        Ok(Self { c, eta, alpha })
    }

    /// Premium rate `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Claim arrival intensity `eta`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Exponential claim-size rate `alpha` (mean claim `1/alpha`).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Adjustment (Lundberg) coefficient `alpha − eta/c`, the exponential
    /// decay rate of the classical ruin probability.
    pub fn adjustment_coeff(&self) -> f64 {
        self.alpha - self.eta / self.c
    }

    /// `eta/(c·alpha)`, the classical ruin probability from surplus zero.
    pub fn ruin_prob_from_zero(&self) -> f64 {
        self.eta / (self.c * self.alpha)
    }
}

/// Laplace exponent `ψ(λ) = cλ − ηλ/(α+λ)`, so `E[e^{λX_t}] = e^{tψ(λ)}`.
pub fn psi(p: &ClParams, lam: f64) -> f64 {
    debug_assert!(lam >= 0.0, "psi: negative argument {lam}");
    p.c * lam - p.eta * lam / (p.alpha + lam)
}

/// Right inverse `Φ_q`: the largest root of `ψ(λ) = q`.
///
/// For this model `ψ(λ) = q` is the quadratic
/// `cλ² + (cα − η − q)λ − qα = 0`, so the root is exact; no iteration.
/// Under the net-profit condition `Φ_0 = 0`.
pub fn phi(p: &ClParams, q: f64) -> f64 {
    debug_assert!(q >= 0.0, "phi: negative argument {q}");
    if q == 0.0 {
        return 0.0;
    }
    let b = p.c * p.alpha - p.eta - q;
    let disc = b * b + 4.0 * p.c * q * p.alpha;
    (-b + disc.sqrt()) / (2.0 * p.c)
}

/// Mean drift per unit time `E[X₁] = c − η/α = ψ'(0+)`, strictly positive
/// under net profit.
pub fn mean_per_unit(p: &ClParams) -> f64 {
    p.c - p.eta / p.alpha
}

/// Scale function `W(x)`, extended by zero on the negative half-line:
///
/// `W(x) = (1/(c−η/α)) (1 − (η/(cα)) e^{(η/c−α)x})` for `x ≥ 0`.
///
/// `W(0) = 1/c`, and `W(x) → 1/E[X₁]` as `x → ∞`.
pub fn scale_w(p: &ClParams, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    (1.0 - p.ruin_prob_from_zero() * (-p.adjustment_coeff() * x).exp()) / mean_per_unit(p)
}

/// Second scale function `Z(x, θ) = e^{θx}(1 − ψ(θ)∫₀ˣ e^{−θy} W(y) dy)`
/// for `x ≥ 0`, and `e^{θx}` for `x < 0`.
///
/// Since `∫₀^∞ e^{−θy} W(y) dy = 1/ψ(θ)`, the bracket collapses to the tail
/// integral and the exponential-sum antiderivative gives the closed form
/// `Z(x, θ) = ψ(θ) (A/θ − B e^{−γx}/(θ+γ))` with `W(y) = A − B e^{−γy}`.
/// That form is used for `x ≥ 0`: it is exact and free of the
/// `e^{θx}·(1 − ≈1)` cancellation that the literal form develops for large
/// `θx`.
pub fn z_theta(p: &ClParams, x: f64, theta: f64) -> f64 {
    debug_assert!(theta >= 0.0, "z_theta: negative theta {theta}");
    if x < 0.0 {
        return (theta * x).exp();
    }
    if theta == 0.0 {
        return 1.0; // ψ(0) = 0 kills the integral term
    }
    let gamma = p.adjustment_coeff();
    let a = 1.0 / mean_per_unit(p);
    let b = p.ruin_prob_from_zero() * a;
    psi(p, theta) * (a / theta - b * (-gamma * x).exp() / (theta + gamma))
}

/// Law of `X_r` started from zero: an atom at `c·r` plus an absolutely
/// continuous part below it.
///
/// `P(X_r ∈ dz) = e^{−ηr} δ_{cr}(dz)
///   + e^{−ηr} e^{−α(cr−z)} √(rηα/(cr−z)) I₁(2√(rηα(cr−z))) dz`, `z < cr`.
#[derive(Debug, Clone, Copy)]
pub struct TransitionLaw {
    params: ClParams,
    r: f64,
}

impl TransitionLaw {
    /// Time horizon `r`.
    pub fn horizon(&self) -> f64 {
        self.r
    }

    /// Location of the atom: `c·r` (the claim-free path).
    pub fn atom_location(&self) -> f64 {
        self.params.c * self.r
    }

    /// Mass of the atom: `e^{−ηr}`, the zero-claim probability.
    pub fn atom_mass(&self) -> f64 {
        (-self.params.eta * self.r).exp()
    }

    /// Density of the continuous part at `z < c·r` (zero at and above the
    /// atom).
    ///
    /// Evaluated through `e^{−y} I₁(y)/y` and the combined exponent
    /// `−(√(ηr) − √(α(cr−z)))²`, which keeps every factor inside the f64
    /// range for all horizons; the literal formula overflows `I₁` once
    /// `2√(rηα(cr−z))` passes ~700.
    pub fn density(&self, z: f64) -> f64 {
        let s = self.atom_location() - z; // total claim amount over [0, r]
        if s <= 0.0 {
            return 0.0;
        }
        claim_sum_density(&self.params, self.r, s)
    }
}

/// Density of the claim sum `A_r = Σ_{i≤N_r} C_i` at `s > 0` (the continuous
/// part; the atom at zero has mass `e^{−ηr}`).
pub(crate) fn claim_sum_density(p: &ClParams, r: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let reta = r * p.eta;
    let als = p.alpha * s;
    let y = 2.0 * (reta * als).sqrt();
    let expo = -(reta.sqrt() - als.sqrt()).powi(2);
    2.0 * reta * p.alpha * bessel::i1_scaled_over_x(y) * expo.exp()
}

/// Build the transition law of `X_r`.
///
/// # Errors
/// [`Error::InvalidArgument`] for `r ≤ 0`; the degenerate horizon is an
/// error, not a limit.
pub fn transition_law(p: &ClParams, r: f64) -> Result<TransitionLaw> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("transition law horizon must be > 0, got {r}")));
    }
    Ok(TransitionLaw { params: *p, r })
}
