//! Event loop shared by the Markov variants.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{
    make_snapshot, pair_index, EdgeEvent, EdgeHistory, EdgeRates, RateInput, SeriesPoint, SimConfig, SimStats,
    Snapshot, Trajectory, Variant,
};
use crate::driving::ClockSchedule;
use crate::error::{invalid, Error, Result};
use crate::graphon::LabeledGraph;
use crate::rng::{stream_rng, STREAM_EDGES};

pub(super) enum Dynamics<'a> {
    Illustrative(f64),
    MeanField(&'a dyn EdgeRates),
}

/// Snapshot, series and change-count bookkeeping.
struct Recorder<'a> {
    config: &'a SimConfig,
    series_times: Vec<f64>,
    next_snapshot: usize,
    next_series: usize,
    snapshots: Vec<Snapshot>,
    series: Vec<SeriesPoint>,
    window_changes: Vec<u64>,
    /// Last window in which each pair changed.
    stamps: Vec<u32>,
    events: Vec<EdgeEvent>,
    complete_until: f64,
}

impl<'a> Recorder<'a> {
    fn new(config: &'a SimConfig) -> Self {
        let n = config.n;
        Self {
            config,
            series_times: config.series_times(),
            next_snapshot: 0,
            next_series: 0,
            snapshots: Vec::with_capacity(config.snapshots.len()),
            series: Vec::new(),
            window_changes: vec![0; config.snapshots.len()],
            stamps: vec![u32::MAX; n * (n - 1) / 2],
            events: Vec::new(),
            complete_until: config.horizon,
        }
    }

    fn change(&mut self, time: f64, i: usize, j: usize, active: bool) {
        let w = self.next_snapshot;
        if w < self.window_changes.len() {
            let stamp = &mut self.stamps[pair_index(i, j)];
            if *stamp != w as u32 {
                *stamp = w as u32;
                self.window_changes[w] += 1;
            }
        }
        if self.complete_until >= self.config.horizon {
            if self.events.len() < self.config.event_log_cap {
                self.events.push(EdgeEvent { time, i: i.min(j) as u32, j: i.max(j) as u32, active });
            } else {
                // Everything strictly before this event is logged.
                self.complete_until = time.next_down();
            }
        }
    }

    /// Emits every record time strictly before `until` (and not beyond the horizon).
    fn emit_before(&mut self, until: f64, graph: &LabeledGraph, last_ring: &[f64]) -> Result<()> {
        let horizon = self.config.horizon;
        while self.next_series < self.series_times.len() {
            let t = self.series_times[self.next_series];
            if t >= until || t > horizon {
                break;
            }
            self.series.push(SeriesPoint { time: t, edge_density: graph.edge_density(), triangle_density: graph.triangle_density() });
            self.next_series += 1;
        }
        while self.next_snapshot < self.config.snapshots.len() {
            let t = self.config.snapshots[self.next_snapshot];
            if t >= until || t > horizon {
                break;
            }
            let ages = last_ring.iter().map(|&r| t - r).collect();
            self.snapshots.push(make_snapshot(t, graph, ages, self.config.transform)?);
            self.next_snapshot += 1;
        }
        Ok(())
    }
}

pub(super) fn run(config: &SimConfig, clocks: ClockSchedule, dynamics: Dynamics<'_>) -> Result<Trajectory> {
    let n = config.n;
    let pairs = (n * (n - 1) / 2) as f64;
    let (variant, proposal_rate) = match dynamics {
        Dynamics::Illustrative(lambda) => (Variant::Illustrative, lambda * pairs),
        Dynamics::MeanField(rates) => {
            let bound = rates.bound();
            if !(bound > 0.0) || !bound.is_finite() {
                return Err(invalid(format!("rate bound must be positive, got {bound}")));
            }
            (Variant::MeanField, 2.0 * bound * pairs)
        }
    };
    let mut rng = stream_rng(config.seed, STREAM_EDGES);
    let exp = (proposal_rate > 0.0).then(|| Exp::new(proposal_rate).expect("positive rate"));
    let mut next_proposal = match &exp {
        Some(e) => e.sample(&mut rng),
        None => f64::INFINITY,
    };
    let rings = clocks.ring_events();
    let mut ring_iter = rings.iter().peekable();

    let mut graph = LabeledGraph::new(n);
    let mut last_ring = vec![0.0; n];
    let mut rec = Recorder::new(config);
    let mut stats = SimStats::default();
    let transform = config.transform;

    loop {
        let next_ring = ring_iter.peek().map_or(f64::INFINITY, |r| r.0);
        let now = next_ring.min(next_proposal);
        rec.emit_before(now, &graph, &last_ring)?;
        if now > config.horizon {
            break;
        }
        if next_ring <= next_proposal {
            let &(t, v) = ring_iter.next().expect("peeked");
            let before = graph.edge_count();
            let removed = graph.isolate(v);
            assert!(
                graph.edge_count() + removed.len() as u64 == before,
                "a vertex ring must only remove edges"
            );
            for u in removed {
                rec.change(t, u, v, false);
            }
            last_ring[v] = t;
            stats.ring_events += 1;
            continue;
        }

        let t = next_proposal;
        next_proposal += exp.as_ref().expect("finite proposal time").sample(&mut rng);
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let active = graph.has_edge(i, j);
        match dynamics {
            Dynamics::Illustrative(_) => {
                if !active {
                    stats.on_proposals += 1;
                    stats.on_accepted += 1;
                    graph.set_edge(i, j, true);
                    rec.change(t, i, j, true);
                }
            }
            Dynamics::MeanField(rates) => {
                let on_clock = rng.random_bool(0.5);
                if on_clock == active {
                    // On-clock of an active edge or off-clock of an inactive one.
                    continue;
                }
                let input = RateInput {
                    time: t,
                    x: transform.apply(t - last_ring[i]),
                    y: transform.apply(t - last_ring[j]),
                    triangle_density: graph.triangle_density(),
                };
                let rate = if on_clock { rates.activation(&input) } else { rates.deactivation(&input) };
                let bound = rates.bound();
                if !(rate >= 0.0) {
                    return Err(invalid(format!("rate evaluated to {rate} at time {t}")));
                }
                if rate > bound * (1.0 + 1e-12) {
                    return Err(Error::ThinningBound { rate, cmax: bound, time: t });
                }
                let accept = rng.random::<f64>() * bound < rate;
                if on_clock {
                    stats.on_proposals += 1;
                } else {
                    stats.off_proposals += 1;
                }
                if accept {
                    if on_clock {
                        stats.on_accepted += 1;
                    } else {
                        stats.off_accepted += 1;
                    }
                    graph.set_edge(i, j, on_clock);
                    rec.change(t, i, j, on_clock);
                }
            }
        }
    }

    let complete_until = rec.complete_until;
    Ok(Trajectory {
        variant,
        n,
        horizon: config.horizon,
        transform,
        clocks,
        snapshots: rec.snapshots,
        window_changes: rec.window_changes,
        series: rec.series,
        stats,
        history: EdgeHistory::Log { events: rec.events, complete_until },
    })
}
