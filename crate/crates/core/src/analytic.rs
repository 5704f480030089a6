//! Closed-form and quadrature evaluation of the expectations that appear
//! as reference values: the per-arc open probability
//! `E[(λ/n)ρ / ((λ/n)ρ + ξ)]` and the probability that the initial
//! infective infects nobody.
//!
//! Ratios of the form `ξ / (ξ + S)` with `S` independent of `ξ` are
//! evaluated through `ξ/(ξ+S) = ∫_0^∞ ξ e^{-tξ} e^{-tS} dt`, which turns the
//! expectation into a one-dimensional integral of
//! `E[ξ e^{-tξ}] · E[e^{-tS}]`. Both factors are closed form for every
//! supported family. Because `ξ ≥ 1` the integrand is bounded by
//! `E ξ · e^{-t}`, so truncating at `ln E ξ + 40` loses less than `1e-17`.

use crate::env::{DistSpec, Law};
use crate::quadrature::{integrate, QuadratureFailure};

const REL_TOL: f64 = 1e-12;

/// `E[ξ / (ξ + a · (ρ_1 + … + ρ_copies))]` with independent copies of `ρ`.
pub fn ratio_by_laplace(xi: &Law, rho: &Law, a: f64, copies: u64) -> Result<f64, QuadratureFailure> {
    if a == 0.0 || copies == 0 {
        return Ok(1.0);
    }
    let upper = xi.mean().ln().max(0.0) + 40.0;
    let m = copies as f64;
    integrate(|t| xi.mean_x_exp(t) * rho.laplace(a * t).powf(m), 0.0, upper, REL_TOL)
}

/// `E[c / (c + x)]` over `ξ` for a fixed `c ≥ 0`.
fn open_given_rate(xi: &Law, c: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    match xi {
        Law::Atoms(a) => a.iter().map(|&(x, p)| p * c / (c + x)).sum(),
        // (c / w) ln(1 + w / (c + lo))
        Law::Uniform { lo, hi } => {
            let w = hi - lo;
            c / w * (w / (c + lo)).ln_1p()
        }
    }
}

/// `1 - ln(1 + z) / z`, accurate for small `z`.
fn one_minus_log1p_ratio(z: f64) -> f64 {
    if z < 0.05 {
        // z/2 - z^2/3 + z^3/4 - ...
        let mut term = -1.0;
        let mut sum = 0.0;
        for k in 2..30 {
            term *= -z;
            sum += term / k as f64;
        }
        sum
    } else {
        1.0 - z.ln_1p() / z
    }
}

/// `E[aρ / (aρ + x)]` over `ρ ~ uniform(lo, hi)` for fixed `x ≥ 1`.
fn open_given_recovery_uniform_weight(lo: f64, hi: f64, a: f64, x: f64) -> f64 {
    // 1 - (x / (a w)) ln(1 + a w / (a lo + x)), rearranged to avoid cancellation
    let base = a * lo + x;
    let z = a * (hi - lo) / base;
    a * lo / base + (x / base) * one_minus_log1p_ratio(z)
}

/// `E[aρ / (aρ + ξ)]` for independent `ρ`, `ξ`. Closed form when either law
/// is atomic, the Laplace route when both are uniform.
pub fn open_probability(rho: &Law, xi: &Law, a: f64) -> Result<f64, QuadratureFailure> {
    if a == 0.0 {
        return Ok(0.0);
    }
    match (rho, xi) {
        (Law::Atoms(r), _) => Ok(r.iter().map(|&(v, p)| p * open_given_rate(xi, a * v)).sum()),
        (Law::Uniform { lo, hi }, Law::Atoms(x)) => {
            Ok(x.iter().map(|&(v, p)| p * open_given_recovery_uniform_weight(*lo, *hi, a, v)).sum())
        }
        (Law::Uniform { .. }, Law::Uniform { .. }) => Ok(1.0 - ratio_by_laplace(xi, rho, a, 1)?),
    }
}

/// Annealed `P(r_∞ = 1) = E[ξ(0) / (ξ(0) + (λ/n) Σ_{i=1}^{n-1} ρ(0, i))]`.
pub fn no_spread_finite_n(xi: &DistSpec, rho: &DistSpec, lambda: f64, n: usize) -> Result<f64, QuadratureFailure> {
    let (xi, rho) = (xi.law(), rho.law());
    let a = lambda / n as f64;
    let copies = n.saturating_sub(1) as u64;
    match rho.is_constant() {
        Some(r) => Ok(1.0 - open_given_rate(&xi, a * r * copies as f64)),
        None => ratio_by_laplace(&xi, &rho, a, copies),
    }
}

/// `n → ∞` limit `E[ξ / (ξ + λ E ρ)]`.
pub fn no_spread_limit(xi: &DistSpec, rho: &DistSpec, lambda: f64) -> f64 {
    1.0 - open_given_rate(&xi.law(), lambda * rho.law().mean())
}
