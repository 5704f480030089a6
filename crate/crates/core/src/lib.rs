//! SIR epidemics on the complete graph in a random environment.
//!
//! Every vertex `j` recovers at rate `ξ(j) ≥ 1` and every edge carries a
//! weight `ρ(i, j) ∈ [0, 1]`; a susceptible vertex `i` is infected at rate
//! `(λ/n) Σ_{j ∈ I} ρ(i, j)`. The crate provides
//!
//! * [`env`]: distribution specs and a lazily evaluated, seed-addressed
//!   environment,
//! * [`dynamics`]: an exact event-driven simulator,
//! * [`percolation`]: the final size through directed reachability,
//! * [`meanfield`]: the deterministic ODE limit and its final-size equation,
//! * [`experiment`]: reproducible Monte Carlo batches and λ-sweeps,
//! * [`cli`]: the `sirenv` command line.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod experiment;
mod fenwick;
pub mod meanfield;
pub mod percolation;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use dynamics::{gillespie_run, EpidemicState, RunResult, Selection, SimError, SimParams};
pub use env::{critical_lambda, moments, DistSpec, EnvError, Environment, Moments};
pub use error::{Error, Result};
pub use experiment::{run_batch, sweep, BatchStats, Engine, ExperimentConfig, Measure, SweepResult};
pub use meanfield::{final_size_fixed_point, ode_solve, MeanFieldState};
pub use percolation::{er_giant_component, percolation_final_size, ArcSampling, PercolationOptions};
