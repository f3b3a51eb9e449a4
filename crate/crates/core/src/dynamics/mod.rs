//! Event-driven simulation of the graph-valued processes.
//!
//! Three edge dynamics share one driving process (Poisson clocks resetting
//! vertex ages, see [`crate::driving`]). A ring at `v` deactivates every
//! edge at `v` in the Markov variants.
//!
//! - Illustrative: an inactive edge activates at constant rate `lambda`.
//! - Mean-field: an inactive edge activates at rate `lambda(t, x_i, x_j, s)`
//!   and an active edge deactivates at rate `mu(t, x_i, x_j, s)`, where `s`
//!   is the current triangle density. Simulated by uniformization: every
//!   pair carries an on-clock and an off-clock of the declared bound rate,
//!   and a ring of a clock is accepted with probability `rate / bound`.
//! - Frozen-uniform: each pair draws one uniform `U_ij` at time 0 and is
//!   active exactly when `U_ij <= H(t, x_i(t), x_j(t))`.
//!
//! Snapshots are relabelled so that vertex types are sorted.

mod frozen;
mod rates;
mod sim;

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rates::{EdgeRates, FnRates, RateInput, RateSpec};

use crate::driving::{sample_clocks, ClockSchedule, EmpiricalCdf, TypeState, TypeTransform};
use crate::error::{invalid, Error, Result};
use crate::graphon::LabeledGraph;
use crate::rng::derive_seed;

pub const DEFAULT_EVENT_LOG_CAP: usize = 10_000_000;

/// Edge-probability function of the frozen-uniform model, `H(t, x_i, x_j)`.
pub type EdgeProbability = std::sync::Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Illustrative,
    MeanField,
    FrozenUniform,
}

impl Variant {
    /// Transform used when none is given: the illustrative model composes
    /// ages with the limiting age CDF, the others use raw ages.
    pub fn default_transform(self, gamma: f64) -> TypeTransform {
        match self {
            Variant::Illustrative => TypeTransform::Exp { gamma },
            Variant::MeanField | Variant::FrozenUniform => TypeTransform::Identity,
        }
    }
}

/// Edge dynamics of a simulation.
#[derive(Clone)]
pub enum EdgeModel {
    Illustrative { lambda: f64 },
    MeanField(std::sync::Arc<dyn EdgeRates>),
    FrozenUniform(EdgeProbability),
}

impl EdgeModel {
    pub fn variant(&self) -> Variant {
        match self {
            EdgeModel::Illustrative { .. } => Variant::Illustrative,
            EdgeModel::MeanField(_) => Variant::MeanField,
            EdgeModel::FrozenUniform(_) => Variant::FrozenUniform,
        }
    }
}

impl fmt::Debug for EdgeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeModel::Illustrative { lambda } => write!(f, "Illustrative {{ lambda: {lambda} }}"),
            EdgeModel::MeanField(r) => write!(f, "MeanField {{ bound: {} }}", r.bound()),
            EdgeModel::FrozenUniform(_) => f.write_str("FrozenUniform"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub gamma: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Strictly increasing times in `[0, horizon]` at which full snapshots
    /// are kept.
    pub snapshots: Vec<f64>,
    pub transform: TypeTransform,
    /// If set, edge and triangle densities are also recorded at every
    /// multiple of this step.
    pub series_step: Option<f64>,
    pub event_log_cap: usize,
}

impl SimConfig {
    /// Snapshot at the horizon only, exponential type transform.
    pub fn new(n: usize, gamma: f64, horizon: f64, seed: u64) -> Self {
        Self {
            n,
            gamma,
            horizon,
            seed,
            snapshots: vec![horizon],
            transform: TypeTransform::Exp { gamma },
            series_step: None,
            event_log_cap: DEFAULT_EVENT_LOG_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid(format!("need at least two vertices, got {}", self.n)));
        }
        if self.n > u32::MAX as usize {
            return Err(invalid("too many vertices"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.snapshots.iter().any(|&t| !(0.0..=self.horizon).contains(&t)) {
            return Err(Error::OutOfRange(format!("snapshot times must lie in [0, {}]", self.horizon)));
        }
        if self.snapshots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("snapshot times must be strictly increasing"));
        }
        if let Some(step) = self.series_step {
            if !(step > 0.0) || !step.is_finite() {
                return Err(invalid(format!("series step must be positive, got {step}")));
            }
        }
        self.transform.check_horizon(self.horizon)
    }

    pub fn sample_clocks(&self) -> Result<ClockSchedule> {
        sample_clocks(self.n, self.gamma, self.horizon, self.seed)
    }

    fn series_times(&self) -> Vec<f64> {
        match self.series_step {
            None => Vec::new(),
            Some(step) => {
                let count = (self.horizon / step * (1.0 + 1e-12)).floor() as usize;
                (0..=count).map(|k| (k as f64 * step).min(self.horizon)).collect()
            }
        }
    }
}

/// State of the process at one snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Graph relabelled so that types are nondecreasing in the label.
    pub graph: LabeledGraph,
    /// Ages and types indexed by original vertex label.
    pub state: TypeState,
    pub cdf: EmpiricalCdf,
    /// `labels[k]` is the original label of relabelled vertex `k`.
    pub labels: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub time: f64,
    pub edge_density: f64,
    pub triangle_density: f64,
}

/// Counters of the uniformized event stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    pub ring_events: u64,
    /// On-clock rings of inactive edges (activation candidates).
    pub on_proposals: u64,
    pub on_accepted: u64,
    /// Off-clock rings of active edges (deactivation candidates).
    pub off_proposals: u64,
    pub off_accepted: u64,
}

/// One state change of one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeEvent {
    pub time: f64,
    pub i: u32,
    pub j: u32,
    pub active: bool,
}

/// What is retained to answer edge-change queries.
pub enum EdgeHistory {
    /// Every state change up to `complete_until` (the whole horizon unless
    /// the log hit its cap).
    Log { events: Vec<EdgeEvent>, complete_until: f64 },
    /// Frozen-uniform states are recomputed from the uniforms on demand.
    Frozen { uniforms: Vec<f64>, h: EdgeProbability },
}

impl fmt::Debug for EdgeHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeHistory::Log { events, complete_until } => f
                .debug_struct("Log")
                .field("events", &events.len())
                .field("complete_until", complete_until)
                .finish(),
            EdgeHistory::Frozen { uniforms, .. } => f.debug_struct("Frozen").field("pairs", &uniforms.len()).finish(),
        }
    }
}

#[derive(Debug)]
pub struct Trajectory {
    pub variant: Variant,
    pub n: usize,
    pub horizon: f64,
    pub transform: TypeTransform,
    pub clocks: ClockSchedule,
    pub snapshots: Vec<Snapshot>,
    /// `window_changes[k]` counts edges that changed in `(s_{k-1}, s_k]`,
    /// with `s_{-1} = 0`, where `s_k` is the `k`-th snapshot time.
    pub window_changes: Vec<u64>,
    pub series: Vec<SeriesPoint>,
    pub stats: SimStats,
    pub history: EdgeHistory,
}

/// Simulates with clocks sampled from the configuration seed.
pub fn simulate(config: &SimConfig, model: &EdgeModel) -> Result<Trajectory> {
    config.validate()?;
    let clocks = config.sample_clocks()?;
    simulate_with_clocks(config, model, clocks)
}

/// Simulates on a given clock schedule (which must match `n` and the horizon).
pub fn simulate_with_clocks(config: &SimConfig, model: &EdgeModel, clocks: ClockSchedule) -> Result<Trajectory> {
    config.validate()?;
    if clocks.vertex_count() != config.n {
        return Err(Error::DimensionMismatch(format!(
            "clock schedule has {} vertices, config has {}",
            clocks.vertex_count(),
            config.n
        )));
    }
    if clocks.horizon() < config.horizon {
        return Err(invalid("clock schedule ends before the horizon"));
    }
    match model {
        EdgeModel::Illustrative { lambda } => {
            if !(*lambda >= 0.0) || !lambda.is_finite() {
                return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
            }
            sim::run(config, clocks, sim::Dynamics::Illustrative(*lambda))
        }
        EdgeModel::MeanField(rates) => sim::run(config, clocks, sim::Dynamics::MeanField(rates.as_ref())),
        EdgeModel::FrozenUniform(h) => frozen::run(config, clocks, h.clone()),
    }
}

pub fn simulate_illustrative(config: &SimConfig, lambda: f64) -> Result<Trajectory> {
    simulate(config, &EdgeModel::Illustrative { lambda })
}

pub fn simulate_meanfield(config: &SimConfig, rates: std::sync::Arc<dyn EdgeRates>) -> Result<Trajectory> {
    simulate(config, &EdgeModel::MeanField(rates))
}

pub fn simulate_frozen_uniform(config: &SimConfig, h: EdgeProbability) -> Result<Trajectory> {
    simulate(config, &EdgeModel::FrozenUniform(h))
}

/// Relabels `graph` so that types are sorted (stable in the old label).
/// Returns the relabelled graph and `labels`, where `labels[k]` is the old
/// label of new vertex `k`.
pub fn relabel_dynamic(graph: &LabeledGraph, types: &[f64]) -> Result<(LabeledGraph, Vec<usize>)> {
    if types.len() != graph.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} types for {} vertices",
            types.len(),
            graph.vertex_count()
        )));
    }
    let mut labels: Vec<usize> = (0..types.len()).collect();
    labels.sort_by(|&a, &b| types[a].total_cmp(&types[b]));
    Ok((graph.permuted(&labels), labels))
}

/// Number of edges whose state is not constant on `[t, t + delta]`.
pub fn edge_change_count(trajectory: &Trajectory, t: f64, delta: f64) -> Result<u64> {
    if !(delta >= 0.0) || !(t >= 0.0) || t + delta > trajectory.horizon * (1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!(
            "window [{t}, {}] not inside [0, {}]",
            t + delta,
            trajectory.horizon
        )));
    }
    match &trajectory.history {
        EdgeHistory::Log { events, complete_until } => {
            if t + delta > *complete_until {
                return Err(Error::LogTruncated(*complete_until));
            }
            let start = events.partition_point(|e| e.time <= t);
            let changed: HashSet<(u32, u32)> =
                events[start..].iter().take_while(|e| e.time <= t + delta).map(|e| (e.i, e.j)).collect();
            Ok(changed.len() as u64)
        }
        EdgeHistory::Frozen { uniforms, h } => Ok(frozen::change_count(
            &trajectory.clocks,
            trajectory.transform,
            uniforms,
            h.as_ref(),
            t,
            t + delta,
        )),
    }
}

/// Triangle density `6 T / n^3` at each snapshot.
pub fn triangle_density_series(trajectory: &Trajectory) -> Vec<(f64, f64)> {
    trajectory.snapshots.iter().map(|s| (s.time, s.graph.triangle_density())).collect()
}

/// Runs `count` independent replicas in parallel; replica `k` receives
/// `derive_seed(base_seed, k)`. Results are in replica order.
pub fn run_replicas<T, F>(count: usize, base_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    (0..count).into_par_iter().map(|k| f(derive_seed(base_seed, k as u64))).collect()
}

pub(crate) fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    b * (b - 1) / 2 + a
}

pub(crate) fn make_snapshot(time: f64, graph: &LabeledGraph, ages: Vec<f64>, transform: TypeTransform) -> Result<Snapshot> {
    let types: Vec<f64> = ages.iter().map(|&a| transform.apply(a)).collect();
    let (relabelled, labels) = relabel_dynamic(graph, &types)?;
    let cdf = EmpiricalCdf::new(types.clone())?;
    Ok(Snapshot { time, graph: relabelled, state: TypeState { time, ages, types }, cdf, labels })
}
