//! The frozen-uniform model: edge states are threshold tests of one uniform
//! per pair against the edge-probability function.

use rand::Rng;

use super::{make_snapshot, EdgeHistory, EdgeProbability, SeriesPoint, SimConfig, SimStats, Trajectory, Variant};
use crate::driving::{ClockSchedule, TypeTransform};
use crate::error::Result;
use crate::graphon::LabeledGraph;
use crate::rng::{stream_rng, STREAM_UNIFORMS};

pub(super) fn run(config: &SimConfig, clocks: ClockSchedule, h: EdgeProbability) -> Result<Trajectory> {
    let n = config.n;
    let mut rng = stream_rng(config.seed, STREAM_UNIFORMS);
    // Pair (a, b), a < b, sits at index b (b - 1) / 2 + a.
    let uniforms: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random()).collect();
    let transform = config.transform;

    let mut snapshots = Vec::with_capacity(config.snapshots.len());
    for &t in &config.snapshots {
        let graph = graph_at(&clocks, transform, &uniforms, h.as_ref(), t);
        let ages = (0..n).map(|v| clocks.age_unchecked(v, t)).collect();
        snapshots.push(make_snapshot(t, &graph, ages, transform)?);
    }
    let series = config
        .series_times()
        .into_iter()
        .map(|t| {
            let g = graph_at(&clocks, transform, &uniforms, h.as_ref(), t);
            SeriesPoint { time: t, edge_density: g.edge_density(), triangle_density: g.triangle_density() }
        })
        .collect();
    let mut window_changes = Vec::with_capacity(config.snapshots.len());
    let mut prev = 0.0;
    for &t in &config.snapshots {
        window_changes.push(change_count(&clocks, transform, &uniforms, h.as_ref(), prev, t));
        prev = t;
    }
    let stats = SimStats { ring_events: clocks.ring_events().iter().filter(|r| r.0 <= config.horizon).count() as u64, ..SimStats::default() };
    Ok(Trajectory {
        variant: Variant::FrozenUniform,
        n,
        horizon: config.horizon,
        transform,
        clocks,
        snapshots,
        window_changes,
        series,
        stats,
        history: EdgeHistory::Frozen { uniforms, h },
    })
}

fn graph_at(
    clocks: &ClockSchedule,
    transform: TypeTransform,
    uniforms: &[f64],
    h: &(dyn Fn(f64, f64, f64) -> f64 + Send + Sync),
    t: f64,
) -> LabeledGraph {
    let n = clocks.vertex_count();
    let types: Vec<f64> = (0..n).map(|v| transform.apply(clocks.age_unchecked(v, t))).collect();
    let mut g = LabeledGraph::new(n);
    let mut k = 0;
    for b in 1..n {
        for a in 0..b {
            if uniforms[k] <= h(t, types[a], types[b]) {
                g.set_edge(a, b, true);
            }
            k += 1;
        }
    }
    g
}

/// Edges whose state is not constant on `[from, to]`.
///
/// Between rings of its endpoints an edge's threshold `H(t, x_i(t), x_j(t))`
/// is assumed monotone in `t`, so a change inside a ring-free stretch shows
/// up as a difference between its endpoint states. The states compared are
/// those at `from`, at `to`, and just before and at every ring of either
/// endpoint in `(from, to]`.
pub(super) fn change_count(
    clocks: &ClockSchedule,
    transform: TypeTransform,
    uniforms: &[f64],
    h: &(dyn Fn(f64, f64, f64) -> f64 + Send + Sync),
    from: f64,
    to: f64,
) -> u64 {
    let n = clocks.vertex_count();
    let ty = |v: usize, t: f64| transform.apply(clocks.age_unchecked(v, t));
    let ty_left = |v: usize, t: f64| transform.apply(clocks.age_left(v, t).expect("ring inside horizon"));
    let rings_in = |v: usize| {
        let r = clocks.rings(v);
        let lo = r.partition_point(|&s| s <= from);
        let hi = r.partition_point(|&s| s <= to);
        &r[lo..hi]
    };
    let mut count = 0;
    let mut k = 0;
    for b in 1..n {
        for a in 0..b {
            let u = uniforms[k];
            k += 1;
            let start = u <= h(from, ty(a, from), ty(b, from));
            let mut changed = start != (u <= h(to, ty(a, to), ty(b, to)));
            for &tau in rings_in(a).iter().chain(rings_in(b)) {
                if changed {
                    break;
                }
                let before = u <= h(tau, ty_left(a, tau), ty_left(b, tau));
                let after = u <= h(tau, ty(a, tau), ty(b, tau));
                changed = before != start || after != start;
            }
            if changed {
                count += 1;
            }
        }
    }
    count
}
