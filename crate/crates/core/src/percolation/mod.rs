//! Final size through the static clock coupling.
//!
//! Give every vertex `i` a recovery clock `T(i) ~ Exp(ξ(i))` and every
//! ordered pair an infection clock `U(i, j) ~ Exp((λ/n) ρ(i, j))`, all
//! independent given the environment. Vertex `i` is ever infected iff a
//! self-avoiding path `0 = l_0, …, l_k = i` has `U(l_m, l_{m+1}) ≤ T(l_m)`
//! for every step, so `r_∞` is the size of the set reachable from 0 along
//! open arcs. All arcs leaving `i` share the single clock `T(i)`.

mod erdos_renyi;

pub use erdos_renyi::{er_giant_component, largest_component, DisjointSet};

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::dynamics::{EngineTag, RunResult};
use crate::env::{DistSpec, Environment};
use crate::quadrature::QuadratureFailure;
use crate::rng::{exponential, keyed_unit, open_unit, stream, StreamKind};

/// How open arcs are sampled during the search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcSampling {
    /// Every clock is a pure function of `(run_seed, vertex[, vertex])`.
    /// Costs `O(n)` per reached vertex.
    Clocks,
    /// Given `T(i)`, the arcs `i → j` are independent with probability
    /// `1 - exp(-(λ/n) ρ(i, j) T(i))`. Candidates are visited by geometric
    /// skips at the envelope `ρ = 1` and accepted with the ratio, so a
    /// reached vertex costs `O(1 + λ T(i))`.
    #[default]
    Skip,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PercolationOptions {
    pub arcs: ArcSampling,
    pub record_layers: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachResult {
    /// Reached vertices in discovery order; `reached[0] == 0`.
    pub reached: Vec<usize>,
    pub r_infinity: usize,
    /// Sizes of the breadth-first layers, starting with `[1]`.
    pub frontier_history: Option<Vec<usize>>,
    /// Number of clocks drawn (recovery plus arc clocks).
    pub clocks_sampled: u64,
}

impl ReachResult {
    pub fn summary(&self, env: &Environment, lambda: f64, run_seed: u64) -> RunResult {
        RunResult {
            engine: EngineTag::Percolation,
            n: env.n(),
            lambda,
            r_infinity: self.r_infinity,
            extinction_time: None,
            events_executed: None,
            truncated: false,
            env_seed: env.seed(),
            run_seed,
            trajectory: None,
        }
    }
}

/// Recovery clock `T(i)` of the keyed coupling.
pub fn recovery_clock(env: &Environment, run_seed: u64, i: usize) -> f64 {
    -keyed_unit(run_seed, StreamKind::RecoveryClock, i as u64, 0).ln() / env.xi(i)
}

/// Infection clock `U(i, j)` of the keyed coupling; `U(i, j)` and `U(j, i)`
/// are distinct draws with the same rate. Infinite when the rate is zero.
pub fn edge_clock(env: &Environment, lambda: f64, run_seed: u64, i: usize, j: usize) -> f64 {
    let rate = lambda / env.n() as f64 * env.rho(i, j);
    -keyed_unit(run_seed, StreamKind::EdgeClock, i as u64, j as u64).ln() / rate
}

/// Breadth-first search from vertex 0 over the open arcs.
pub fn percolation_final_size(env: &Environment, lambda: f64, run_seed: u64, opts: &PercolationOptions) -> ReachResult {
    assert!(lambda >= 0.0, "lambda ≥ 0 required");
    match opts.arcs {
        ArcSampling::Clocks => search_clocks(env, lambda, run_seed, opts.record_layers),
        ArcSampling::Skip => search_skip(env, lambda, run_seed, opts.record_layers),
    }
}

fn search_clocks(env: &Environment, lambda: f64, run_seed: u64, record_layers: bool) -> ReachResult {
    let n = env.n();
    let scale = lambda / n as f64;
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut reached = vec![0usize];
    let mut layers = record_layers.then(|| vec![1usize]);
    let mut clocks = 0u64;
    let mut layer_start = 0;
    while layer_start < reached.len() {
        let layer_end = reached.len();
        for k in layer_start..layer_end {
            let i = reached[k];
            let t = recovery_clock(env, run_seed, i);
            clocks += 1;
            #[allow(clippy::needless_range_loop)]
            for j in 0..n {
                if seen[j] {
                    continue;
                }
                clocks += 1;
                // U(i, j) <= T(i)  <=>  -ln u <= (λ/n) ρ(i, j) T(i)
                let e = -keyed_unit(run_seed, StreamKind::EdgeClock, i as u64, j as u64).ln();
                if e <= scale * env.rho(i, j) * t {
                    seen[j] = true;
                    reached.push(j);
                }
            }
        }
        if let Some(l) = layers.as_mut() {
            if reached.len() > layer_end {
                l.push(reached.len() - layer_end);
            }
        }
        layer_start = layer_end;
    }
    ReachResult { r_infinity: reached.len(), reached, frontier_history: layers, clocks_sampled: clocks }
}

fn search_skip(env: &Environment, lambda: f64, run_seed: u64, record_layers: bool) -> ReachResult {
    let n = env.n();
    let scale = lambda / n as f64;
    let mut rng = stream(run_seed);
    let mut unvisited: Vec<u32> = (1..n as u32).collect();
    let mut reached = vec![0usize];
    let mut layers = record_layers.then(|| vec![1usize]);
    let mut clocks = 0u64;
    let mut hits: Vec<usize> = Vec::new();
    let mut layer_start = 0;
    while layer_start < reached.len() {
        let layer_end = reached.len();
        for k in layer_start..layer_end {
            let i = reached[k];
            let t = exponential(&mut rng, env.xi(i));
            clocks += 1;
            let envelope_rate = scale * t;
            if envelope_rate <= 0.0 || unvisited.is_empty() {
                continue;
            }
            // P(arc open) <= p_max = 1 - exp(-envelope_rate); gaps between
            // envelope successes are Geometric(p_max).
            let p_max = -(-envelope_rate).exp_m1();
            let m = unvisited.len();
            hits.clear();
            let mut pos = 0.0f64;
            loop {
                pos += (-open_unit(&mut rng).ln() / envelope_rate).floor();
                if pos >= m as f64 {
                    break;
                }
                let slot = pos as usize;
                let j = unvisited[slot] as usize;
                clocks += 1;
                let p = -(-envelope_rate * env.rho(i, j)).exp_m1();
                if open_unit(&mut rng) * p_max < p {
                    hits.push(slot);
                }
                pos += 1.0;
            }
            // hits are increasing; remove from the back so slots stay valid
            for &slot in hits.iter().rev() {
                reached.push(unvisited.swap_remove(slot) as usize);
            }
        }
        if let Some(l) = layers.as_mut() {
            if reached.len() > layer_end {
                l.push(reached.len() - layer_end);
            }
        }
        layer_start = layer_end;
    }
    ReachResult { r_infinity: reached.len(), reached, frontier_history: layers, clocks_sampled: clocks }
}

/// `E[(λ/n)ρ / ((λ/n)ρ + ξ)]`, the probability that a given arc is open.
pub fn per_edge_open_probability(rho_spec: &DistSpec, xi_spec: &DistSpec, lambda: f64, n: usize) -> Result<f64, QuadratureFailure> {
    analytic::open_probability(&rho_spec.law(), &xi_spec.law(), lambda / n as f64)
}
