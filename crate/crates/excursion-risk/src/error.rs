//! Crate-wide error type.

/// Errors surfaced by model construction, numerics, and the law evaluators.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Model parameters violate a construction invariant (positivity,
    /// net-profit condition).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An operation argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Root bracketing failed: no sign change over `[lo, hi]`.
    #[error("invalid bracket [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi} share a sign")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative numeric routine exhausted its budget.
    #[error("{what} failed to converge: {detail}")]
    NonConvergence { what: String, detail: String },

    /// A value exceeded the representable f64 range.
    #[error("overflow computing {what}")]
    Overflow { what: String },

    /// A grid was too coarse to represent a density faithfully.
    #[error("grid resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
