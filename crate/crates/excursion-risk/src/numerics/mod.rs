//! Shared numeric primitives: Bessel `I₁`, adaptive quadrature, bracketed
//! root finding, numeric differentiation, monotone interpolation.
//!
//! All routines are pure functions and safe for concurrent use.

pub mod bessel;
pub mod diff;
pub mod interp;
pub mod quad;
pub mod roots;

pub use bessel::{i1 as bessel_i1, i1_scaled as bessel_i1_scaled};
pub use diff::differentiate;
pub use interp::MonotoneCubic;
pub use quad::{integrate, integrate_to_inf, QuadratureResult};
pub use roots::find_root;

/// Default absolute quadrature tolerance for the kernel integrals.
/// Downstream probabilities are reported to at least six digits, so the
/// kernels are computed well below that. CLI-overridable.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
