//! The `sirenv` command line.
//!
//! Each subcommand resolves its configuration from an optional `--config`
//! file (TOML, JSON, or any output file of a previous run) overlaid with the
//! flags given, writes its outputs to `--out` (default
//! `./out/<config-hash>/`), and embeds the resolved configuration in every
//! file so that `--config <output>` reproduces it byte for byte.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::{self, gillespie_run, Selection, SimParams};
use crate::env::{serde_spec, DistSpec, Environment};
use crate::error::{Error, Result};
use crate::experiment::{self, estimate_p_no_spread, BatchPoint, Engine, ExperimentConfig, Measure};
use crate::meanfield::{self, final_size_fixed_point, ode_solve, MeanFieldState};
use crate::percolation::{er_giant_component, percolation_final_size, ArcSampling, PercolationOptions};
use crate::rng::{derive_seed, StreamKind};

#[derive(Debug, Parser)]
#[command(name = "sirenv", version, about = "SIR epidemics on complete graphs in a random environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML or JSON config, or an output file of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: ./out/<config-hash>/]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct Specs {
    /// Recovery-rate law, e.g. `constant:1`, `two_point:1:0.5:2`.
    #[arg(long)]
    xi: Option<String>,
    /// Edge-weight law, e.g. `uniform:0:1`.
    #[arg(long)]
    rho: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One event-driven run.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        specs: Specs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = ["direct", "thinning"])]
        selection: Option<String>,
        /// Also write every event to trajectory.csv.
        #[arg(long)]
        trajectory: bool,
    },
    /// One final size by reachability over open arcs.
    Percolate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        specs: Specs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = ["clocks", "skip"])]
        arcs: Option<String>,
        /// Record the breadth-first layer sizes.
        #[arg(long)]
        layers: bool,
    },
    /// Monte Carlo batches over an n × λ grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        specs: Specs,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Comma-separated rates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambda: Option<Vec<f64>>,
        #[arg(long, value_parser = ["absolute", "critical"])]
        lambda_units: Option<String>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, value_parser = ["dynamic", "percolation"])]
        engine: Option<String>,
        #[arg(long, value_parser = ["annealed", "quenched"])]
        measure: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = ["direct", "thinning"])]
        selection: Option<String>,
        #[arg(long, value_parser = ["clocks", "skip"])]
        arcs: Option<String>,
    },
    /// Mean-field ODE and final-size fixed point (ξ ≡ ρ ≡ 1).
    Meanfield {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Initial infective fraction.
        #[arg(long)]
        i0: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Largest component of G(n, μ/n).
    Er {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte Carlo and analytic P(r_∞ = 1).
    NoSpread {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        specs: Specs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, value_parser = ["dynamic", "percolation"])]
        engine: Option<String>,
        #[arg(long, value_parser = ["annealed", "quenched"])]
        measure: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn default_xi() -> DistSpec {
    DistSpec::recovery("constant:1").expect("valid spec")
}

fn default_rho() -> DistSpec {
    DistSpec::weight("constant:1").expect("valid spec")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    pub lambda: f64,
    #[serde(with = "serde_spec::recovery", default = "default_xi")]
    pub xi_spec: DistSpec,
    #[serde(with = "serde_spec::weight", default = "default_rho")]
    pub rho_spec: DistSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub trajectory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolateConfig {
    pub n: usize,
    pub lambda: f64,
    #[serde(with = "serde_spec::recovery", default = "default_xi")]
    pub xi_spec: DistSpec,
    #[serde(with = "serde_spec::weight", default = "default_rho")]
    pub rho_spec: DistSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub arc_sampling: ArcSampling,
    #[serde(default)]
    pub layers: bool,
}

fn default_i0() -> f64 {
    1e-3
}

fn default_step() -> f64 {
    meanfield::DEFAULT_STEP
}

fn default_horizon() -> f64 {
    meanfield::DEFAULT_HORIZON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanfieldConfig {
    pub lambda: f64,
    #[serde(default = "default_i0")]
    pub i0: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErConfig {
    pub n: usize,
    pub mu: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_reps() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoSpreadConfig {
    pub n: usize,
    pub lambda: f64,
    #[serde(with = "serde_spec::recovery", default = "default_xi")]
    pub xi_spec: DistSpec,
    #[serde(with = "serde_spec::weight", default = "default_rho")]
    pub rho_spec: DistSpec,
    #[serde(default = "default_reps")]
    pub replications: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub seed: u64,
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 for invalid input, 2 for failures while running.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads a config file into a JSON object. Output files of earlier runs
/// contribute their embedded config.
fn load_config(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    let value = if trimmed.starts_with('#') {
        let line = trimmed
            .lines()
            .find_map(|l| l.strip_prefix("# config: "))
            .ok_or_else(|| Error::Config(format!("{}: no `# config:` line", path.display())))?;
        serde_json::from_str(line)?
    } else if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed)?;
        v.pointer("/provenance/config").or_else(|| v.get("config")).cloned().unwrap_or(v)
    } else {
        let table: toml::Table = toml::from_str(&text)?;
        serde_json::to_value(table)?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(Error::Config(format!("{}: expected a table of settings", path.display()))),
    }
}

/// Overlays flags onto the config file and deserializes the result.
struct Overlay(Map<String, Value>);

impl Overlay {
    fn new(config: Option<&Path>) -> Result<Self> {
        Ok(Self(match config {
            Some(p) => load_config(p)?,
            None => Map::new(),
        }))
    }

    fn set<V: Serialize>(&mut self, key: &str, v: Option<V>) -> &mut Self {
        if let Some(v) = v {
            self.0.insert(key.to_string(), serde_json::to_value(v).expect("flag serializes"));
        }
        self
    }

    fn or_default(&mut self, key: &str, v: &str) -> &mut Self {
        self.0.entry(key).or_insert_with(|| Value::from(v));
        self
    }

    fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        self.set(key, on.then_some(true))
    }

    fn specs(&mut self, specs: Specs) -> &mut Self {
        self.set("xi_spec", specs.xi).set("rho_spec", specs.rho)
    }

    fn resolve<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(Value::Object(self.0.clone())).map_err(|e| Error::Config(e.to_string()))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("lambda ≥ 0 required, got {lambda}")))
    }
}

fn hash_of<T: Serialize>(command: &str, config: &T) -> String {
    let text = serde_json::to_string(&json!({ "command": command, "config": config })).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn new(out: Option<PathBuf>, hash: &str) -> Result<Self> {
        let dir = out.unwrap_or_else(|| Path::new("out").join(hash));
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn document<T: Serialize>(&mut self, name: &str, command: &str, hash: &str, config: &T, result: Value) -> Result<()> {
        let doc = json!({ "command": command, "config_hash": hash, "config": config, "result": result });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV preceded by the `#` lines that make it a valid `--config`.
    fn csv<T: Serialize>(&mut self, name: &str, hash: &str, config: &T, body: Vec<u8>) -> Result<()> {
        let mut text = format!("# config_hash: {hash}\n# config: {}\n", serde_json::to_string(config)?).into_bytes();
        text.extend(body);
        self.write(name, &text)
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    experiment::with_jobs(jobs, f)?
}

fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Simulate { common, specs, n, lambda, seed, selection, trajectory } => {
            let cfg: SimulateConfig = Overlay::new(common.config.as_deref())?
                .specs(specs)
                .set("n", n)
                .set("lambda", lambda)
                .set("seed", seed)
                .set("selection", selection)
                .flag("trajectory", trajectory)
                .resolve()?;
            check_lambda(cfg.lambda)?;
            let env = Environment::new(cfg.n, derive_seed(cfg.seed, StreamKind::Env, 0, 0), cfg.xi_spec.clone(), cfg.rho_spec.clone())?;
            let mut params = SimParams::new(cfg.lambda, derive_seed(cfg.seed, StreamKind::Run, 0, 0)).with_selection(cfg.selection);
            if cfg.trajectory {
                params = params.with_trajectory();
            }
            let result = gillespie_run(&env, &params)?;
            let hash = hash_of("simulate", &cfg);
            let mut out = Output::new(common.out, &hash)?;
            if let Some(points) = &result.trajectory {
                let mut body = Vec::new();
                dynamics::write_trajectory_csv(points, &mut body)?;
                out.csv("trajectory.csv", &hash, &cfg, body)?;
            }
            out.document("simulate.json", "simulate", &hash, &cfg, serde_json::to_value(&result)?)?;
            result.complete()?;
            Ok(out.written)
        }
        Command::Percolate { common, specs, n, lambda, seed, arcs, layers } => {
            let cfg: PercolateConfig = Overlay::new(common.config.as_deref())?
                .specs(specs)
                .set("n", n)
                .set("lambda", lambda)
                .set("seed", seed)
                .set("arc_sampling", arcs)
                .flag("layers", layers)
                .resolve()?;
            check_lambda(cfg.lambda)?;
            let env = Environment::new(cfg.n, derive_seed(cfg.seed, StreamKind::Env, 0, 0), cfg.xi_spec.clone(), cfg.rho_spec.clone())?;
            let run_seed = derive_seed(cfg.seed, StreamKind::Run, 0, 0);
            let opts = PercolationOptions { arcs: cfg.arc_sampling, record_layers: cfg.layers };
            let reach = percolation_final_size(&env, cfg.lambda, run_seed, &opts);
            let mut result = serde_json::to_value(reach.summary(&env, cfg.lambda, run_seed))?;
            if let Some(layers) = &reach.frontier_history {
                result["frontier_history"] = serde_json::to_value(layers)?;
            }
            let hash = hash_of("percolate", &cfg);
            let mut out = Output::new(common.out, &hash)?;
            out.document("percolate.json", "percolate", &hash, &cfg, result)?;
            Ok(out.written)
        }
        Command::Sweep { common, specs, n, lambda, lambda_units, reps, engine, measure, epsilon, confidence, seed, selection, arcs } => {
            let cfg: ExperimentConfig = Overlay::new(common.config.as_deref())?
                .specs(specs)
                .set("n_grid", n)
                .set("lambda_grid", lambda)
                .set("lambda_units", lambda_units)
                .set("replications", reps)
                .set("engine", engine)
                .set("measure", measure)
                .set("epsilon", epsilon)
                .set("confidence", confidence)
                .set("master_seed", seed)
                .set("selection", selection)
                .set("arc_sampling", arcs)
                .or_default("xi_spec", "constant:1")
                .or_default("rho_spec", "constant:1")
                .resolve()?;
            cfg.validate()?;
            let result = with_jobs(common.jobs, || experiment::sweep(&cfg))?;
            let mut out = Output::new(common.out, &result.provenance.config_hash)?;
            let mut csv = Vec::new();
            experiment::write_sweep_csv(&result, &mut csv)?;
            out.write("sweep.csv", &csv)?;
            let mut js = Vec::new();
            experiment::write_sweep_json(&result, &mut js)?;
            out.write("sweep.json", &js)?;
            Ok(out.written)
        }
        Command::Meanfield { common, lambda, i0, step, horizon } => {
            let cfg: MeanfieldConfig = Overlay::new(common.config.as_deref())?
                .set("lambda", lambda)
                .set("i0", i0)
                .set("step", step)
                .set("horizon", horizon)
                .resolve()?;
            check_lambda(cfg.lambda)?;
            let traj = ode_solve(cfg.lambda, MeanFieldState::from_infective(cfg.i0), cfg.horizon, cfg.step)?;
            let fixed = final_size_fixed_point(cfg.lambda, 1.0 - cfg.i0, cfg.i0)?;
            let terminal = *traj.last().expect("trajectory starts with the initial state");
            let max_drift = traj.iter().map(MeanFieldState::drift).fold(0.0, f64::max);
            let hash = hash_of("meanfield", &cfg);
            let mut out = Output::new(common.out, &hash)?;
            let mut body = Vec::new();
            meanfield::write_trajectory_csv(&traj, &mut body)?;
            out.csv("meanfield.csv", &hash, &cfg, body)?;
            let result = json!({
                "terminal": terminal,
                "fixed_point": fixed,
                "terminal_gap": (terminal.r + terminal.i - fixed.value).abs(),
                "max_drift": max_drift,
            });
            out.document("meanfield.json", "meanfield", &hash, &cfg, result)?;
            Ok(out.written)
        }
        Command::Er { common, n, mu, seed } => {
            let cfg: ErConfig = Overlay::new(common.config.as_deref())?.set("n", n).set("mu", mu).set("seed", seed).resolve()?;
            if cfg.n == 0 || !(cfg.mu >= 0.0 && cfg.mu.is_finite()) {
                return Err(Error::Config(format!("need n ≥ 1 and mu ≥ 0, got n = {}, mu = {}", cfg.n, cfg.mu)));
            }
            let largest = er_giant_component(cfg.n, cfg.mu, cfg.seed);
            let nf = cfg.n as f64;
            let hash = hash_of("er", &cfg);
            let mut out = Output::new(common.out, &hash)?;
            let result = json!({ "largest": largest, "fraction": largest as f64 / nf, "log_n": nf.ln() });
            out.document("er.json", "er", &hash, &cfg, result)?;
            Ok(out.written)
        }
        Command::NoSpread { common, specs, n, lambda, reps, engine, measure, seed } => {
            let cfg: NoSpreadConfig = Overlay::new(common.config.as_deref())?
                .specs(specs)
                .set("n", n)
                .set("lambda", lambda)
                .set("replications", reps)
                .set("engine", engine)
                .set("measure", measure)
                .set("seed", seed)
                .resolve()?;
            check_lambda(cfg.lambda)?;
            let mut exp =
                ExperimentConfig::new(cfg.xi_spec.clone(), cfg.rho_spec.clone(), vec![cfg.n], vec![cfg.lambda], cfg.replications, cfg.seed);
            exp.engine = cfg.engine;
            exp.measure = cfg.measure;
            let point = BatchPoint { n: cfg.n, lambda: cfg.lambda, grid_index: 0 };
            let est = with_jobs(common.jobs, || estimate_p_no_spread(&exp, point))?;
            let hash = hash_of("no-spread", &cfg);
            let mut out = Output::new(common.out, &hash)?;
            out.document("no_spread.json", "no-spread", &hash, &cfg, serde_json::to_value(est)?)?;
            Ok(out.written)
        }
    }
}
