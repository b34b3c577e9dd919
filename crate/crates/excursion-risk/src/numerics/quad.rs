//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule with the embedded 7-point Gauss rule supplies the
//! per-interval error estimate; intervals are split worst-first until the
//! summed estimate drops below the requested absolute tolerance. Semi-infinite
//! ranges go through the rational map `s = a + t/(1-t)`, which turns an
//! exponentially decaying tail into a smooth integrand on `(0, 1)`.

use crate::error::{Error, Result};

/// Outcome of one quadrature call.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    /// Estimate of the integral.
    pub value: f64,
    /// Conservative absolute error estimate.
    pub abs_error_estimate: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: usize,
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) and weights,
// with the embedded 7-point Gauss weights. Standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One GK15 pass over `[a, b]`: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();

    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        kronrod += WGK[i] * (f1 + f2);
        res_abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for i in 0..7 {
        res_asc += WGK[i] * ((fv[i] - mean).abs() + (fv[14 - i] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK-style rescaled error
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

const MAX_INTERVALS: usize = 4096;

/// Integrate `f` over the finite interval `[a, b]` to absolute tolerance
/// `tol`. Endpoint behaviour is the caller's responsibility: substitute away
/// any non-integrable structure first.
///
/// # Errors
/// [`Error::NonConvergence`] when the interval budget is exhausted with the
/// error estimate still above `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    assert!(tol > 0.0, "quadrature tolerance must be positive");
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0 });
    }

    // Start from a uniform split so narrow interior features cannot hide
    // inside a single deceptively converged panel, then adapt worst-first.
    // Interval counts stay small enough that O(n) extraction is fine.
    const INITIAL_PANELS: usize = 16;
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(INITIAL_PANELS);
    let mut evals = 0usize;
    let mut total_err = 0.0f64;
    for i in 0..INITIAL_PANELS {
        let lo = a + (b - a) * i as f64 / INITIAL_PANELS as f64;
        let hi = if i + 1 == INITIAL_PANELS { b } else { a + (b - a) * (i + 1) as f64 / INITIAL_PANELS as f64 };
        if hi <= lo && a < b {
            continue;
        }
        let (v, e) = gk15(&f, lo, hi);
        evals += 15;
        total_err += e;
        segs.push((lo, hi, v, e));
    }

    while total_err > tol && segs.len() < MAX_INTERVALS {
        // split the interval with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval set");
        let (lo, hi, _, err) = segs[idx];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer splittable in f64
        }
        segs.swap_remove(idx);
        total_err -= err;
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evals += 30;
        total_err += e1 + e2;
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }

    // sum in a fixed (position-sorted) order for reproducibility
    segs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value: f64 = segs.iter().map(|s| s.2).sum();
    let abs_err: f64 = segs.iter().map(|s| s.3).sum();

    if abs_err > tol.max(1e-12 * value.abs().max(1.0)) && segs.len() >= MAX_INTERVALS {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature".into(),
            detail: format!("error estimate {abs_err:.3e} above tolerance {tol:.3e} after {MAX_INTERVALS} intervals"),
        });
    }
    Ok(QuadratureResult { value, abs_error_estimate: abs_err, evaluations: evals })
}

/// Integrate `f` over `[a, ∞)` to absolute tolerance `tol` via the
/// transformation `s = a + t/(1-t)`, `ds = dt/(1-t)²`. Suited to integrands
/// with (eventually) exponential decay.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<QuadratureResult> {
    let g = move |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let om = 1.0 - t;
        let s = a + t / om;
        let v = f(s) / (om * om);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}
