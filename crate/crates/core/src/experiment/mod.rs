//! Monte Carlo batches and λ-sweeps over n-grids.
//!
//! Each replication derives its own seeds from
//! `(master_seed, grid index, replication index)`, and batches aggregate
//! integer sufficient statistics only, so results are bit-identical for any
//! worker count or scheduling order.

mod config;
mod output;

pub use config::{Engine, ExperimentConfig, LambdaUnits, Measure, DEFAULT_CONFIDENCE, DEFAULT_EPSILON};
pub use output::{write_sweep_csv, write_sweep_json, SWEEP_CSV_COLUMNS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::dynamics::{gillespie_run, SimParams};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::meanfield::{ensure_classic, final_size_fixed_point};
use crate::percolation::{percolation_final_size, PercolationOptions};
use crate::rng::{derive_seed, StreamKind};
use crate::stats::{mean_interval, proportion, Estimate};

pub use crate::stats::wilson_interval;

/// Replication key used for the single quenched environment.
const QUENCHED_ENV_KEY: u64 = u64::MAX;

/// Sufficient statistics of a batch; merging is commutative and exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub runs: u64,
    pub failures: u64,
    pub sum_r: u128,
    pub sum_r_sq: u128,
    pub exceed: u64,
    pub exceed_sum_r: u128,
    pub no_spread: u64,
}

impl Tally {
    pub fn record(n: usize, epsilon: f64, r: usize) -> Self {
        let exceeds = r as f64 / n as f64 >= epsilon;
        let r128 = r as u128;
        Self {
            runs: 1,
            failures: 0,
            sum_r: r128,
            sum_r_sq: r128 * r128,
            exceed: exceeds as u64,
            exceed_sum_r: if exceeds { r128 } else { 0 },
            no_spread: (r == 1) as u64,
        }
    }

    pub fn failure() -> Self {
        Self { failures: 1, ..Self::default() }
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            runs: self.runs + o.runs,
            failures: self.failures + o.failures,
            sum_r: self.sum_r + o.sum_r,
            sum_r_sq: self.sum_r_sq + o.sum_r_sq,
            exceed: self.exceed + o.exceed,
            exceed_sum_r: self.exceed_sum_r + o.exceed_sum_r,
            no_spread: self.no_spread + o.no_spread,
        }
    }
}

/// Theoretical reference values attached to a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub lambda_c: f64,
    /// `λ_c / (λ_c − λ)` bound on `E r_∞` when `λ < λ_c`.
    pub subcritical_bound: Option<f64>,
    /// `λ_c / (ε n (λ_c − λ))` bound on `P(r_∞/n ≥ ε)` when `λ < λ_c`.
    pub chebyshev_bound: Option<f64>,
    /// Finite-n `P(r_∞ = 1)`: annealed, or exact for the quenched environment.
    pub no_spread_finite_n: f64,
    /// `E[ξ / (ξ + λ E ρ)]`.
    pub no_spread_limit: f64,
    /// Mean-field final size, only for `ξ = ρ ≡ 1`.
    pub meanfield_final_size: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub n: usize,
    pub lambda: f64,
    pub lambda_over_lambda_c: f64,
    pub replications: u64,
    pub failures: u64,
    pub mean_r_inf: Estimate,
    pub mean_final_fraction: Estimate,
    pub exceed_probability: Estimate,
    pub p_no_spread: Estimate,
    /// Point estimate of `P(r_∞ ≥ 2)`.
    pub p_spread: f64,
    /// `E[r_∞/n | r_∞/n ≥ ε]`, when any run exceeded.
    pub mean_fraction_given_exceed: Option<f64>,
    pub references: References,
}

/// The quantities a batch needs from the config, for one `(n, λ)`.
#[derive(Debug, Clone, Copy)]
pub struct BatchPoint {
    pub n: usize,
    pub lambda: f64,
    pub grid_index: u64,
}

fn quenched_env_seed(master: u64) -> u64 {
    derive_seed(master, StreamKind::Env, QUENCHED_ENV_KEY, 0)
}

/// Environment seed of replication `rep` at `grid_index`.
pub fn env_seed(config: &ExperimentConfig, grid_index: u64, rep: u64) -> u64 {
    match config.measure {
        Measure::Annealed => derive_seed(config.master_seed, StreamKind::Env, grid_index, rep),
        Measure::Quenched => quenched_env_seed(config.master_seed),
    }
}

pub fn run_seed(config: &ExperimentConfig, grid_index: u64, rep: u64) -> u64 {
    derive_seed(config.master_seed, StreamKind::Run, grid_index, rep)
}

/// Final size of one replication with the configured engine.
pub fn replicate(config: &ExperimentConfig, env: &Environment, lambda: f64, run_seed: u64) -> Result<usize> {
    match config.engine {
        Engine::Dynamic => {
            let params = SimParams::new(lambda, run_seed).with_selection(config.selection);
            Ok(gillespie_run(env, &params)?.complete()?.r_infinity)
        }
        Engine::Percolation => {
            let opts = PercolationOptions { arcs: config.arc_sampling, record_layers: false };
            Ok(percolation_final_size(env, lambda, run_seed, &opts).r_infinity)
        }
    }
}

/// Exact quenched `P(r_∞ = 1) = ξ(0) / (ξ(0) + (λ/n) Σ_{i≥1} ρ(0, i))`.
pub fn quenched_no_spread(env: &Environment, lambda: f64) -> f64 {
    let n = env.n();
    let pressure: f64 = (1..n).map(|i| env.rho(0, i)).sum();
    let xi = env.xi(0);
    xi / (xi + lambda / n as f64 * pressure)
}

fn tally_batch(config: &ExperimentConfig, point: BatchPoint) -> Result<Tally> {
    let BatchPoint { n, lambda, grid_index } = point;
    let quenched = match config.measure {
        Measure::Quenched => {
            Some(Environment::new(n, quenched_env_seed(config.master_seed), config.xi_spec.clone(), config.rho_spec.clone())?)
        }
        Measure::Annealed => None,
    };
    let tally = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let owned;
            let env = match &quenched {
                Some(e) => e,
                None => {
                    owned = Environment::new(n, env_seed(config, grid_index, rep), config.xi_spec.clone(), config.rho_spec.clone())
                        .expect("specs validated");
                    &owned
                }
            };
            match replicate(config, env, lambda, run_seed(config, grid_index, rep)) {
                Ok(r) => Tally::record(n, config.epsilon, r),
                Err(_) => Tally::failure(),
            }
        })
        .reduce(Tally::default, Tally::merge);
    Ok(tally)
}

fn references(config: &ExperimentConfig, n: usize, lambda: f64) -> Result<References> {
    let lambda_c = config.lambda_c()?;
    let below = lambda < lambda_c;
    let no_spread_finite_n = match config.measure {
        Measure::Annealed => analytic::no_spread_finite_n(&config.xi_spec, &config.rho_spec, lambda, n)?,
        Measure::Quenched => {
            let env = Environment::new(n, quenched_env_seed(config.master_seed), config.xi_spec.clone(), config.rho_spec.clone())?;
            quenched_no_spread(&env, lambda)
        }
    };
    let meanfield_final_size = match ensure_classic(&config.xi_spec, &config.rho_spec) {
        Ok(()) => Some(final_size_fixed_point(lambda, 1.0, 0.0)?.value),
        Err(_) => None,
    };
    Ok(References {
        lambda_c,
        subcritical_bound: below.then(|| lambda_c / (lambda_c - lambda)),
        chebyshev_bound: below.then(|| lambda_c / (config.epsilon * n as f64 * (lambda_c - lambda))),
        no_spread_finite_n,
        no_spread_limit: analytic::no_spread_limit(&config.xi_spec, &config.rho_spec, lambda),
        meanfield_final_size,
    })
}

/// Runs `replications` independent epidemics at one `(n, λ)` and summarizes
/// them.
pub fn run_batch(config: &ExperimentConfig, point: BatchPoint) -> Result<BatchStats> {
    config.validate()?;
    if point.n == 0 || !(point.lambda >= 0.0 && point.lambda.is_finite()) {
        return Err(Error::Config(format!("need n ≥ 1 and lambda ≥ 0, got n = {}, lambda = {}", point.n, point.lambda)));
    }
    let tally = tally_batch(config, point)?;
    let refs = references(config, point.n, point.lambda)?;
    Ok(summarize(config, point, tally, refs))
}

fn summarize(config: &ExperimentConfig, point: BatchPoint, t: Tally, references: References) -> BatchStats {
    let level = config.confidence;
    let nf = point.n as f64;
    let runs = t.runs.max(1);
    let mean_r_inf = mean_interval(t.runs, t.sum_r as f64, t.sum_r_sq as f64, level);
    let mean_final_fraction = Estimate { value: mean_r_inf.value / nf, lo: mean_r_inf.lo / nf, hi: mean_r_inf.hi / nf };
    BatchStats {
        n: point.n,
        lambda: point.lambda,
        lambda_over_lambda_c: point.lambda / references.lambda_c,
        replications: config.replications,
        failures: t.failures,
        mean_r_inf,
        mean_final_fraction,
        exceed_probability: proportion(t.exceed, runs, level),
        p_no_spread: proportion(t.no_spread, runs, level),
        p_spread: (t.runs - t.no_spread) as f64 / runs as f64,
        mean_fraction_given_exceed: (t.exceed > 0).then(|| t.exceed_sum_r as f64 / (t.exceed as f64 * nf)),
        references,
    }
}

/// Monte Carlo `P(r_∞ = 1)` with the finite-n and limiting analytic values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoSpreadEstimate {
    pub estimate: Estimate,
    pub finite_n_analytic: f64,
    pub limit_analytic: f64,
}

pub fn estimate_p_no_spread(config: &ExperimentConfig, point: BatchPoint) -> Result<NoSpreadEstimate> {
    let stats = run_batch(config, point)?;
    Ok(NoSpreadEstimate {
        estimate: stats.p_no_spread,
        finite_n_analytic: stats.references.no_spread_finite_n,
        limit_analytic: stats.references.no_spread_limit,
    })
}

/// Empirical witness `(c, b)` for a supercritical rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalWitness {
    pub lambda: f64,
    pub c: f64,
    /// Minimum over the n-grid of `P(r_∞/n ≥ c)`.
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalCheck {
    pub lambda: f64,
    pub exceed_by_n: Vec<f64>,
    /// See [`decreasing_in_n`].
    pub decreasing_in_n: bool,
    /// `P(r_∞/n ≥ ε) ≤ upper CI of E r_∞ / (ε n)` at every n.
    pub chebyshev_holds: bool,
}

/// Estimates ordered by increasing `n` are non-increasing, and strictly
/// decreasing from every positive estimate. Two zero estimates cannot be
/// told apart at the simulated replication count and do not fail the check.
pub fn decreasing_in_n(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] && (w[0] == 0.0 || w[1] < w[0]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub master_seed: u64,
    pub engine: Engine,
    pub measure: Measure,
    pub version: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub provenance: Provenance,
    pub lambda_c: f64,
    pub rows: Vec<BatchStats>,
    pub supercritical_witnesses: Vec<SupercriticalWitness>,
    pub subcritical_checks: Vec<SubcriticalCheck>,
}

impl SweepResult {
    pub fn row(&self, n: usize, lambda: f64) -> Option<&BatchStats> {
        self.rows.iter().find(|r| r.n == n && r.lambda == lambda)
    }
}

/// Every `(n, λ)` of the grid, rows ordered by n then λ.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let lambda_c = config.lambda_c()?;
    let lambdas = config.resolved_lambdas()?;
    let mut rows = Vec::with_capacity(config.n_grid.len() * lambdas.len());
    for (ni, &n) in config.n_grid.iter().enumerate() {
        for (li, &lambda) in lambdas.iter().enumerate() {
            let grid_index = (ni * lambdas.len() + li) as u64;
            rows.push(run_batch(config, BatchPoint { n, lambda, grid_index })?);
        }
    }

    let mut ns = config.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut supercritical_witnesses = Vec::new();
    let mut subcritical_checks = Vec::new();
    for &lambda in &lambdas {
        let at = |n: usize| rows.iter().find(|r| r.n == n && r.lambda == lambda).expect("grid row");
        if lambda > lambda_c {
            let b = ns.iter().map(|&n| at(n).exceed_probability.value).fold(f64::INFINITY, f64::min);
            supercritical_witnesses.push(SupercriticalWitness { lambda, c: config.epsilon, b });
        } else if lambda < lambda_c {
            let exceed_by_n: Vec<f64> = ns.iter().map(|&n| at(n).exceed_probability.value).collect();
            let chebyshev_holds = ns.iter().all(|&n| {
                let row = at(n);
                row.exceed_probability.value <= row.mean_r_inf.hi / (config.epsilon * n as f64)
            });
            subcritical_checks.push(SubcriticalCheck {
                lambda,
                decreasing_in_n: decreasing_in_n(&exceed_by_n),
                exceed_by_n,
                chebyshev_holds,
            });
        }
    }

    Ok(SweepResult {
        provenance: Provenance {
            config_hash: config.hash(),
            master_seed: config.master_seed,
            engine: config.engine,
            measure: config.measure,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        },
        lambda_c,
        rows,
        supercritical_witnesses,
        subcritical_checks,
    })
}

/// Runs `f` on a pool of `jobs` workers (`None`: available parallelism).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("jobs ≥ 1 required".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::DistSpec;

    fn classic(n: Vec<usize>, lambdas: Vec<f64>, reps: u64) -> ExperimentConfig {
        ExperimentConfig::new(DistSpec::recovery("constant:1").unwrap(), DistSpec::weight("constant:1").unwrap(), n, lambdas, reps, 42)
    }

    #[test]
    fn zero_lambda_batch() {
        let cfg = classic(vec![50], vec![0.0], 200);
        let s = run_batch(&cfg, BatchPoint { n: 50, lambda: 0.0, grid_index: 0 }).unwrap();
        assert_eq!(s.mean_r_inf.value, 1.0);
        assert_eq!(s.exceed_probability.value, 0.0);
        assert_eq!(s.p_no_spread.value, 1.0);
        assert_eq!(s.references.no_spread_finite_n, 1.0);
    }

    #[test]
    fn estimator_identities() {
        let mut cfg = classic(vec![40], vec![1.5], 500);
        cfg.xi_spec = DistSpec::recovery("two_point:1:0.5:2").unwrap();
        for engine in [Engine::Dynamic, Engine::Percolation] {
            cfg.engine = engine;
            let s = run_batch(&cfg, BatchPoint { n: 40, lambda: 1.5, grid_index: 3 }).unwrap();
            assert_eq!(s.mean_final_fraction.value, s.mean_r_inf.value / 40.0);
            assert_eq!(s.p_no_spread.value + s.p_spread, 1.0);
            for e in [s.mean_r_inf, s.exceed_probability, s.p_no_spread] {
                assert!(e.contains(e.value));
            }
            assert!(s.mean_r_inf.value >= 1.0);
        }
    }

    #[test]
    fn only_subcritical_grid_has_no_witness() {
        let cfg = classic(vec![20, 40], vec![0.3, 0.6], 100);
        let res = sweep(&cfg).unwrap();
        assert!(res.supercritical_witnesses.is_empty());
        assert_eq!(res.subcritical_checks.len(), 2);
        assert_eq!(res.rows.len(), 4);
    }

    #[test]
    fn jobs_do_not_change_results() {
        let mut cfg = classic(vec![30, 60], vec![0.5, 2.0], 300);
        cfg.rho_spec = DistSpec::weight("uniform:0:1").unwrap();
        let a = with_jobs(Some(1), || sweep(&cfg)).unwrap().unwrap();
        let b = with_jobs(Some(3), || sweep(&cfg)).unwrap().unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn quenched_mode_uses_one_environment() {
        let mut cfg = classic(vec![30], vec![2.0], 10);
        cfg.measure = Measure::Quenched;
        assert_eq!(env_seed(&cfg, 0, 0), env_seed(&cfg, 5, 9));
        cfg.measure = Measure::Annealed;
        assert_ne!(env_seed(&cfg, 0, 0), env_seed(&cfg, 0, 1));
    }

    #[test]
    fn decreasing_check() {
        assert!(decreasing_in_n(&[0.08, 0.001, 0.0]));
        assert!(decreasing_in_n(&[0.08, 0.0, 0.0]));
        assert!(!decreasing_in_n(&[0.08, 0.08, 0.0]));
        assert!(!decreasing_in_n(&[0.0, 0.01]));
    }
}
