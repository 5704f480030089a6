//! Exact continuous-time simulation of the SIR process on `C_n`.
//!
//! An infective `i` is removed at rate `ξ(i)`; a susceptible `i` becomes
//! infective at rate `(λ/n) Σ_{j ∈ I} ρ(i, j)`. The run starts from a single
//! infective at vertex 0 and stops when no infective is left.
//!
//! Two event-selection schemes produce the same law:
//!
//! * [`Selection::Direct`] keeps every susceptible's pressure
//!   `w(i) = Σ_{j ∈ I} ρ(i, j)` up to date (O(n) per event) and picks the
//!   next event exactly. Pressures are held in 2^-40 fixed point so that
//!   incremental sums equal from-scratch sums bit for bit.
//! * [`Selection::Thinning`] proposes infections at the envelope rate
//!   `(λ/n)|S||I|` (valid because `ρ ≤ 1`) and accepts a uniformly chosen
//!   pair `(i ∈ S, j ∈ I)` with probability `ρ(i, j)`.
//!
//! Recoveries are drawn through a Fenwick index over `ξ` of the infectives.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Environment;
use crate::fenwick::Fenwick;
use crate::rng::{exponential, open_unit, stream};

const PRESSURE_SCALE: f64 = (1u64 << 40) as f64;

#[inline]
fn quantize(rho: f64) -> u64 {
    (rho * PRESSURE_SCALE).round() as u64
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation parameter: {0}")]
    InvalidParams(String),
    #[error("no event possible: every rate is zero")]
    DeadState,
    #[error("event cap of {cap} reached before extinction; r_infinity >= {lower_bound}")]
    EventCapReached { cap: u64, lower_bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Susceptible,
    Infective,
    Removed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Direct,
    #[default]
    Thinning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Infection,
    Recovery,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Infection => "infection",
            EventKind::Recovery => "recovery",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub vertex: usize,
}

/// Which engine produced a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineTag {
    Dynamic,
    Percolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub lambda: f64,
    /// Defaults to `50 n` when `None`.
    pub max_events: Option<u64>,
    pub record_trajectory: bool,
    pub run_seed: u64,
    pub selection: Selection,
}

impl SimParams {
    pub fn new(lambda: f64, run_seed: u64) -> Self {
        Self { lambda, max_events: None, record_trajectory: false, run_seed, selection: Selection::default() }
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(SimError::InvalidParams(format!("lambda ≥ 0 required, got {}", self.lambda)));
        }
        if self.max_events == Some(0) {
            return Err(SimError::InvalidParams("max_events ≥ 1 required, got 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub event: EventKind,
    pub vertex: usize,
    pub s_count: usize,
    pub i_count: usize,
    pub r_count: usize,
}

/// Summary of one run, shared by both engines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub engine: EngineTag,
    pub n: usize,
    pub lambda: f64,
    /// Number of vertices ever infective (a lower bound when truncated).
    pub r_infinity: usize,
    /// Time of the last event; the percolation engine has no clock.
    pub extinction_time: Option<f64>,
    pub events_executed: Option<u64>,
    pub truncated: bool,
    pub env_seed: u64,
    pub run_seed: u64,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

impl RunResult {
    /// Turns a run stopped by the event cap into an error.
    pub fn complete(self) -> Result<Self, SimError> {
        if self.truncated {
            Err(SimError::EventCapReached { cap: self.events_executed.unwrap_or(0), lower_bound: self.r_infinity })
        } else {
            Ok(self)
        }
    }
}

/// Index set with O(1) insert, remove and uniform access.
#[derive(Debug, Clone)]
struct VertexSet {
    members: Vec<u32>,
    pos: Vec<u32>,
}

impl VertexSet {
    const ABSENT: u32 = u32::MAX;

    fn new(n: usize) -> Self {
        Self { members: Vec::with_capacity(n), pos: vec![Self::ABSENT; n] }
    }

    fn insert(&mut self, v: usize) {
        debug_assert_eq!(self.pos[v], Self::ABSENT);
        self.pos[v] = self.members.len() as u32;
        self.members.push(v as u32);
    }

    fn remove(&mut self, v: usize) {
        let p = self.pos[v] as usize;
        let last = *self.members.last().expect("non-empty");
        self.members.swap_remove(p);
        if last as usize != v {
            self.pos[last as usize] = p as u32;
        }
        self.pos[v] = Self::ABSENT;
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn get(&self, k: usize) -> usize {
        self.members[k] as usize
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&v| v as usize)
    }
}

/// Aggregate event rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub recovery: f64,
    pub infection: f64,
}

/// The partition `(S, I, R)` plus the bookkeeping needed to draw events.
#[derive(Debug, Clone)]
pub struct EpidemicState {
    lambda: f64,
    status: Vec<Status>,
    susceptible: VertexSet,
    infective: VertexSet,
    removed: usize,
    /// Fixed-point pressures; only maintained for direct selection.
    pressure: Option<Vec<u64>>,
    pressure_total: u128,
    recovery: Fenwick,
}

impl EpidemicState {
    /// `(S, I, R) = (C_n \ {0}, {0}, ∅)`.
    pub fn initial(env: &Environment, lambda: f64, track_pressure: bool) -> Self {
        let n = env.n();
        let mut status = vec![Status::Susceptible; n];
        status[0] = Status::Infective;
        let mut susceptible = VertexSet::new(n);
        let mut infective = VertexSet::new(n);
        infective.insert(0);
        (1..n).for_each(|v| susceptible.insert(v));
        let mut recovery = Fenwick::new(n);
        recovery.set(0, env.xi(0));
        let (pressure, pressure_total) = if track_pressure {
            let w: Vec<u64> = (0..n).map(|i| if i == 0 { 0 } else { quantize(env.rho(i, 0)) }).collect();
            let total = w.iter().map(|&x| x as u128).sum();
            (Some(w), total)
        } else {
            (None, 0)
        };
        Self { lambda, status, susceptible, infective, removed: 0, pressure, pressure_total, recovery }
    }

    pub fn n(&self) -> usize {
        self.status.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn status(&self, v: usize) -> Status {
        self.status[v]
    }

    /// `(|S|, |I|, |R|)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.susceptible.len(), self.infective.len(), self.removed)
    }

    pub fn infective_count(&self) -> usize {
        self.infective.len()
    }

    /// Ever-infected vertices so far.
    pub fn ever_infected(&self) -> usize {
        self.infective.len() + self.removed
    }

    pub fn susceptibles(&self) -> impl Iterator<Item = usize> + '_ {
        self.susceptible.iter()
    }

    pub fn infectives(&self) -> impl Iterator<Item = usize> + '_ {
        self.infective.iter()
    }

    /// Maintained pressure `w(i)` of a susceptible, if tracked.
    pub fn pressure(&self, i: usize) -> Option<f64> {
        self.pressure.as_ref().map(|w| w[i] as f64 / PRESSURE_SCALE)
    }

    fn infection_scale(&self) -> f64 {
        self.lambda / self.n() as f64
    }

    /// Incrementally maintained totals. Without pressure tracking the
    /// infection total is computed from scratch.
    pub fn rates(&self, env: &Environment) -> Rates {
        let infection = match self.pressure {
            Some(_) => self.infection_scale() * (self.pressure_total as f64 / PRESSURE_SCALE),
            None => self.recompute_rates(env).infection,
        };
        Rates { recovery: self.recovery.total(), infection }
    }

    /// Totals from their definitions, `O(|S| |I|)`.
    pub fn recompute_rates(&self, env: &Environment) -> Rates {
        let recovery = self.infective.iter().map(|j| env.xi(j)).sum();
        let weight: f64 = self.susceptible.iter().map(|i| self.infective.iter().map(|j| env.rho(i, j)).sum::<f64>()).sum();
        Rates { recovery, infection: self.infection_scale() * weight }
    }

    /// Checks every maintained pressure against `Σ_{j ∈ I} ρ(i, j)`.
    pub fn pressures_consistent(&self, env: &Environment) -> bool {
        let Some(w) = &self.pressure else { return true };
        let per_vertex = self.susceptible.iter().all(|i| w[i] == self.infective.iter().map(|j| quantize(env.rho(i, j))).sum::<u64>());
        let total: u128 = self.susceptible.iter().map(|i| w[i] as u128).sum();
        per_vertex && total == self.pressure_total
    }

    /// Draws the waiting time and the next event by the direct method.
    pub fn next_event<R: RngCore + ?Sized>(&self, env: &Environment, rng: &mut R) -> Result<(f64, Event), SimError> {
        let recovery = self.recovery.total();
        let infection = if self.pressure.is_some() {
            self.infection_scale() * (self.pressure_total as f64 / PRESSURE_SCALE)
        } else {
            return self.next_event_thinned(env, rng);
        };
        let total = recovery + infection;
        if self.infective.len() == 0 || total <= 0.0 {
            return Err(SimError::DeadState);
        }
        let dt = exponential(rng, total);
        let x = open_unit(rng) * total;
        if x < recovery || infection <= 0.0 || self.pressure_total == 0 {
            let v = self.recovery.find(x.min(recovery)).ok_or(SimError::DeadState)?;
            return Ok((dt, Event { kind: EventKind::Recovery, vertex: v }));
        }
        let w = self.pressure.as_ref().expect("tracked");
        let mut target = rng.random_range(0..self.pressure_total);
        for i in self.susceptible.iter() {
            let wi = w[i] as u128;
            if target < wi {
                return Ok((dt, Event { kind: EventKind::Infection, vertex: i }));
            }
            target -= wi;
        }
        unreachable!("pressure total exceeds the sum of pressures")
    }

    /// Same law as [`Self::next_event`], with infections drawn by thinning
    /// against the envelope `(λ/n)|S||I|`. Rejected proposals only advance
    /// the clock.
    pub fn next_event_thinned<R: RngCore + ?Sized>(&self, env: &Environment, rng: &mut R) -> Result<(f64, Event), SimError> {
        let recovery = self.recovery.total();
        let (s, i) = (self.susceptible.len(), self.infective.len());
        let envelope = self.infection_scale() * s as f64 * i as f64;
        let total = recovery + envelope;
        if i == 0 || total <= 0.0 {
            return Err(SimError::DeadState);
        }
        let mut dt = 0.0;
        loop {
            dt += exponential(rng, total);
            let x = open_unit(rng) * total;
            if x < recovery || envelope <= 0.0 {
                let v = self.recovery.find(x.min(recovery)).ok_or(SimError::DeadState)?;
                return Ok((dt, Event { kind: EventKind::Recovery, vertex: v }));
            }
            let target = self.susceptible.get(rng.random_range(0..s));
            let source = self.infective.get(rng.random_range(0..i));
            if open_unit(rng) < env.rho(target, source) {
                return Ok((dt, Event { kind: EventKind::Infection, vertex: target }));
            }
        }
    }

    /// Applies an event drawn from this state.
    pub fn apply(&mut self, env: &Environment, event: Event) {
        let v = event.vertex;
        match event.kind {
            EventKind::Recovery => {
                debug_assert_eq!(self.status[v], Status::Infective);
                self.status[v] = Status::Removed;
                self.infective.remove(v);
                self.removed += 1;
                self.recovery.set(v, 0.0);
                if let Some(w) = self.pressure.as_mut() {
                    let mut dropped: u128 = 0;
                    for i in self.susceptible.iter() {
                        let q = quantize(env.rho(i, v));
                        w[i] -= q;
                        dropped += q as u128;
                    }
                    self.pressure_total -= dropped;
                }
            }
            EventKind::Infection => {
                debug_assert_eq!(self.status[v], Status::Susceptible);
                self.status[v] = Status::Infective;
                self.susceptible.remove(v);
                self.infective.insert(v);
                self.recovery.set(v, env.xi(v));
                if let Some(w) = self.pressure.as_mut() {
                    self.pressure_total -= w[v] as u128;
                    w[v] = 0;
                    let mut added: u128 = 0;
                    for i in self.susceptible.iter() {
                        let q = quantize(env.rho(i, v));
                        w[i] += q;
                        added += q as u128;
                    }
                    self.pressure_total += added;
                }
            }
        }
    }
}

/// Simulates one epidemic from `I_0 = {0}` until extinction or the event cap.
pub fn gillespie_run(env: &Environment, params: &SimParams) -> Result<RunResult, SimError> {
    params.validate()?;
    let n = env.n();
    let cap = params.max_events.unwrap_or(50 * n as u64);
    let direct = params.selection == Selection::Direct;
    let mut state = EpidemicState::initial(env, params.lambda, direct);
    let mut rng = stream(params.run_seed);
    let mut trajectory = params.record_trajectory.then(Vec::new);
    let mut time = 0.0;
    let mut events = 0u64;

    while state.infective_count() > 0 && events < cap {
        let (dt, event) = state.next_event(env, &mut rng)?;
        time += dt;
        state.apply(env, event);
        events += 1;
        if let Some(traj) = trajectory.as_mut() {
            let (s, i, r) = state.counts();
            traj.push(TrajectoryPoint { time, event: event.kind, vertex: event.vertex, s_count: s, i_count: i, r_count: r });
        }
    }

    Ok(RunResult {
        engine: EngineTag::Dynamic,
        n,
        lambda: params.lambda,
        r_infinity: state.ever_infected(),
        extinction_time: Some(time),
        events_executed: Some(events),
        truncated: state.infective_count() > 0,
        env_seed: env.seed(),
        run_seed: params.run_seed,
        trajectory,
    })
}

/// Writes a trajectory as CSV with columns
/// `time,event,vertex,s_count,i_count,r_count`.
pub fn write_trajectory_csv<W: std::io::Write>(points: &[TrajectoryPoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "event", "vertex", "s_count", "i_count", "r_count"])?;
    for p in points {
        w.write_record([
            p.time.to_string(),
            p.event.as_str().to_string(),
            p.vertex.to_string(),
            p.s_count.to_string(),
            p.i_count.to_string(),
            p.r_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
