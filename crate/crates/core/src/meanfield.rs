//! Deterministic limit of the classic case `ξ = ρ ≡ 1`:
//!
//! ```text
//! s' = -λ i s,   i' = i (λ s - 1),   r' = i
//! ```
//!
//! integrated with fixed-step RK4, and its final-size equation
//! `1 - r = s0 exp(-λ (r - r0))` with `r0 = 1 - s0 - i0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::TrajectoryPoint;
use crate::env::DistSpec;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 50.0;
const EXTINCT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanFieldError {
    #[error("invalid mean-field input: {0}")]
    InvalidInput(String),
    #[error("step too large: conservation drift {drift:e} exceeds 1e-6 at t = {t}")]
    StepTooLarge { drift: f64, t: f64 },
    #[error("the mean-field limit is only defined for xi = rho = constant 1, got xi = {xi}, rho = {rho}")]
    UnsupportedEnvironment { xi: String, rho: String },
}

/// Susceptible, infective and removed fractions at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl MeanFieldState {
    /// Start with infective fraction `i0` and no removed mass.
    pub fn from_infective(i0: f64) -> Self {
        Self { t: 0.0, s: 1.0 - i0, i: i0, r: 0.0 }
    }

    pub fn drift(&self) -> f64 {
        (self.s + self.i + self.r - 1.0).abs()
    }
}

/// Refuses anything but `ξ ≡ 1`, `ρ ≡ 1`.
pub fn ensure_classic(xi: &DistSpec, rho: &DistSpec) -> Result<(), MeanFieldError> {
    if xi.is_constant(1.0) && rho.is_constant(1.0) {
        Ok(())
    } else {
        Err(MeanFieldError::UnsupportedEnvironment { xi: xi.to_string(), rho: rho.to_string() })
    }
}

fn deriv(lambda: f64, s: f64, i: f64) -> (f64, f64, f64) {
    (-lambda * i * s, i * (lambda * s - 1.0), i)
}

fn rk4(lambda: f64, x: &MeanFieldState, h: f64) -> MeanFieldState {
    let k1 = deriv(lambda, x.s, x.i);
    let k2 = deriv(lambda, x.s + 0.5 * h * k1.0, x.i + 0.5 * h * k1.1);
    let k3 = deriv(lambda, x.s + 0.5 * h * k2.0, x.i + 0.5 * h * k2.1);
    let k4 = deriv(lambda, x.s + h * k3.0, x.i + h * k3.1);
    let w = |a: f64, b: f64, c: f64, d: f64| h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    MeanFieldState {
        t: x.t + h,
        s: x.s + w(k1.0, k2.0, k3.0, k4.0),
        i: x.i + w(k1.1, k2.1, k3.1, k4.1),
        r: x.r + w(k1.2, k2.2, k3.2, k4.2),
    }
}

/// Integrates from `init` up to `horizon` with fixed step `step`, stopping
/// early once the infective fraction drops below `1e-12`. The returned
/// trajectory starts with `init`.
pub fn ode_solve(lambda: f64, init: MeanFieldState, horizon: f64, step: f64) -> Result<Vec<MeanFieldState>, MeanFieldError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(MeanFieldError::InvalidInput(format!("lambda ≥ 0 required, got {lambda}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(MeanFieldError::InvalidInput(format!("step > 0 required, got {step}")));
    }
    if horizon.is_nan() || horizon < 0.0 {
        return Err(MeanFieldError::InvalidInput(format!("horizon ≥ 0 required, got {horizon}")));
    }
    let in_unit = |x: f64| (0.0..=1.0).contains(&x);
    if !(in_unit(init.s) && in_unit(init.i) && in_unit(init.r)) || init.drift() > 1e-9 {
        return Err(MeanFieldError::InvalidInput("fractions must lie in [0, 1] and sum to 1".into()));
    }
    let steps = (horizon / step).round() as usize;
    let mut out = Vec::with_capacity(steps.min(1 << 20) + 1);
    out.push(init);
    let mut x = init;
    for k in 1..=steps {
        if x.i < EXTINCT {
            break;
        }
        let mut next = rk4(lambda, &x, step);
        // accumulate time without drift
        next.t = init.t + k as f64 * step;
        let drift = next.drift();
        let tol = 1e-12;
        if drift.is_nan() || drift > 1e-6 || next.s < -tol || next.i < -tol || next.r < -tol {
            return Err(MeanFieldError::StepTooLarge { drift, t: next.t });
        }
        out.push(next);
        x = next;
    }
    Ok(out)
}

/// Infective fraction at time `t` by linear interpolation; zero past the
/// end of an extinct trajectory.
pub fn infective_at(traj: &[MeanFieldState], t: f64) -> f64 {
    let first = traj[0];
    if t <= first.t {
        return first.i;
    }
    let last = traj[traj.len() - 1];
    if t >= last.t {
        return if last.i < EXTINCT { 0.0 } else { last.i };
    }
    let k = traj.partition_point(|x| x.t <= t);
    let (a, b) = (traj[k - 1], traj[k]);
    a.i + (b.i - a.i) * (t - a.t) / (b.t - a.t)
}

/// Largest root of the final-size equation; `bracketed` is false when only
/// the trivial root `1 - s0` exists (then `value` is that root).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub value: f64,
    pub bracketed: bool,
}

/// Final removed fraction `r` solving `1 - r = s0 exp(-λ (r - r0))`,
/// `r0 = 1 - s0 - i0`, found by bisection to `1e-12`.
pub fn final_size_fixed_point(lambda: f64, s0: f64, i0: f64) -> Result<FixedPoint, MeanFieldError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(MeanFieldError::InvalidInput(format!("lambda ≥ 0 required, got {lambda}")));
    }
    if !(s0 >= 0.0 && i0 >= 0.0 && s0 + i0 <= 1.0 + 1e-15) {
        return Err(MeanFieldError::InvalidInput(format!("need s0, i0 ≥ 0 and s0 + i0 ≤ 1, got s0 = {s0}, i0 = {i0}")));
    }
    let r0 = (1.0 - s0 - i0).max(0.0);
    let h = |r: f64| 1.0 - r - s0 * (-lambda * (r - r0)).exp();
    let trivial = 1.0 - s0;
    if s0 == 0.0 {
        return Ok(FixedPoint { value: 1.0, bracketed: true });
    }
    // h is concave; its maximum on [1 - s0, 1] sits where s0 λ e^{-λ(r - r0)} = 1
    let peak = if lambda > 0.0 && s0 * lambda > 1.0 { (r0 + (s0 * lambda).ln() / lambda).clamp(trivial, 1.0) } else { trivial };
    if h(peak) <= 0.0 {
        return Ok(FixedPoint { value: trivial, bracketed: false });
    }
    let (mut lo, mut hi) = (peak, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FixedPoint { value: 0.5 * (lo + hi), bracketed: true })
}

/// Sup-distance between a simulated `|I_t|/n` and the ODE restarted from
/// the simulated state at the first event where `|I_t| ≥ align · n`.
///
/// The single-infective start has an `O(1)` random take-off delay that does
/// not vanish with `n`; restarting the ODE at a macroscopic infective level
/// removes it. Returns `None` when the run never reaches that level.
pub fn aligned_sup_distance(traj: &[TrajectoryPoint], n: usize, lambda: f64, align: f64, step: f64) -> Result<Option<f64>, MeanFieldError> {
    let nf = n as f64;
    let level = (align * nf).ceil().max(1.0) as usize;
    let (start, init) = if level <= 1 {
        (0, MeanFieldState { t: 0.0, s: (nf - 1.0) / nf, i: 1.0 / nf, r: 0.0 })
    } else {
        match traj.iter().position(|p| p.i_count >= level) {
            Some(k) => {
                let p = traj[k];
                (k + 1, MeanFieldState { t: p.time, s: p.s_count as f64 / nf, i: p.i_count as f64 / nf, r: p.r_count as f64 / nf })
            }
            None => return Ok(None),
        }
    };
    let horizon = traj.last().map_or(0.0, |p| p.time) - init.t + step;
    let ode = ode_solve(lambda, init, horizon.max(0.0), step)?;
    let mut prev = init.i;
    let mut sup: f64 = 0.0;
    for p in &traj[start..] {
        let model = infective_at(&ode, p.time);
        let now = p.i_count as f64 / nf;
        sup = sup.max((prev - model).abs()).max((now - model).abs());
        prev = now;
    }
    Ok(Some(sup))
}

/// CSV with columns `t,s,i,r`.
pub fn write_trajectory_csv<W: std::io::Write>(traj: &[MeanFieldState], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "s", "i", "r"])?;
    for x in traj {
        w.write_record([x.t.to_string(), x.s.to_string(), x.i.to_string(), x.r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain bisection on z = 1 - exp(-λ z) over [0.5, 1].
    fn oracle_root(lambda: f64) -> f64 {
        let (mut lo, mut hi) = (0.5f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - (1.0 - (-lambda * mid).exp()) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn fixed_point_examples() {
        let fp = final_size_fixed_point(0.0, 0.7, 0.3).unwrap();
        assert!((fp.value - 0.3).abs() < 1e-15);
        assert!(!fp.bracketed);

        let z = oracle_root(2.0);
        assert!((z - 0.796_81).abs() < 1e-5);
        let fp = final_size_fixed_point(2.0, 1.0, 0.0).unwrap();
        assert!(fp.bracketed);
        assert!((fp.value - z).abs() < 1e-11);
        let fp = final_size_fixed_point(2.0, 1.0 - 1e-9, 1e-9).unwrap();
        assert!((fp.value - z).abs() < 1e-7);

        let fp = final_size_fixed_point(1.0, 1.0, 0.0).unwrap();
        assert_eq!(fp.value, 0.0);
        assert!(!fp.bracketed);
        let fp = final_size_fixed_point(1.0, 1.0 - 1e-8, 1e-8).unwrap();
        assert!(fp.value < 1e-3);

        assert!(final_size_fixed_point(1.0, 0.8, 0.3).is_err());
        assert!(final_size_fixed_point(-1.0, 0.8, 0.1).is_err());
        assert_eq!(final_size_fixed_point(3.0, 0.0, 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn equilibrium_stays_put() {
        let init = MeanFieldState { t: 0.0, s: 0.6, i: 0.0, r: 0.4 };
        let traj = ode_solve(2.0, init, 10.0, 1e-3).unwrap();
        assert!(traj.iter().all(|x| x.s == 0.6 && x.i == 0.0 && x.r == 0.4));
    }

    #[test]
    fn subcritical_infective_fraction_decreases() {
        for lambda in [0.2, 0.5, 0.99] {
            let traj = ode_solve(lambda, MeanFieldState::from_infective(0.3), 20.0, 1e-3).unwrap();
            assert!(traj.windows(2).all(|w| w[1].i < w[0].i), "lambda {lambda}");
        }
    }

    #[test]
    fn terminal_removed_matches_fixed_point() {
        let init = MeanFieldState { t: 0.0, s: 0.999, i: 0.001, r: 0.0 };
        let traj = ode_solve(2.0, init, DEFAULT_HORIZON, DEFAULT_STEP).unwrap();
        let fp = final_size_fixed_point(2.0, 0.999, 0.001).unwrap();
        let last = traj.last().unwrap();
        assert!((last.r - fp.value).abs() < 1e-3, "{} vs {}", last.r, fp.value);
        let worst = traj.iter().map(|x| x.drift()).fold(0.0, f64::max);
        assert!(worst <= 1e-9);
    }

    #[test]
    fn step_halving_converges() {
        let init = MeanFieldState { t: 0.0, s: 0.99, i: 0.01, r: 0.0 };
        let a = ode_solve(2.0, init, 20.0, 1e-2).unwrap();
        let b = ode_solve(2.0, init, 20.0, 5e-3).unwrap();
        assert!((a.last().unwrap().r - b.last().unwrap().r).abs() <= 1e-8);
    }

    #[test]
    fn huge_step_is_rejected() {
        let init = MeanFieldState::from_infective(0.5);
        assert!(matches!(ode_solve(50.0, init, 10.0, 1.0), Err(MeanFieldError::StepTooLarge { .. })));
    }

    #[test]
    fn refuses_random_environments() {
        let one = DistSpec::recovery("constant:1").unwrap();
        let w1 = DistSpec::weight("constant:1").unwrap();
        assert!(ensure_classic(&one, &w1).is_ok());
        let w = DistSpec::weight("uniform:0:1").unwrap();
        assert!(ensure_classic(&one, &w).is_err());
    }
}
