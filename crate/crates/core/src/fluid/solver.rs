//! Integrator for the edge-probability equation along characteristics.
//!
//! Vertices are grouped into cohorts by birth step: cohort 0 holds the
//! vertices that have not rung since time 0, cohort `j >= 1` those whose last
//! ring fell in `((j-1) dt, j dt]`. Members of a cohort age together, so the
//! edge probability `g(a, b)` of a cohort pair is carried along unchanged by
//! the transport and only the reaction term needs integrating:
//!
//! `dg/dt = (1 - g) λ(t, x_a, x_b, s) - g μ(t, x_a, x_b, s)`,
//!
//! with `s` the triangle density of the current graphon. A ring moves a
//! vertex into the newest cohort, whose edges start at 0. Cohort masses at
//! each step come from the driving path; graphons are recovered by laying
//! the cohorts out youngest first on `[0, 1]` (quantile order of ages) and
//! averaging onto an `m`-grid.

use serde::{Deserialize, Serialize};

use super::path::grid_steps;
use super::DrivingPath;
use crate::driving::TypeTransform;
use crate::dynamics::{EdgeRates, RateInput};
use crate::error::{invalid, Error, Result};
use crate::graphon::{triangle_density, StepGraphon};

/// Largest accepted `bound * dt`.
pub const MAX_STABLE_STEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidConfig {
    /// Resolution of output graphons and of the triangle-density grid.
    pub m: usize,
    pub dt: f64,
    /// Output times; each must be a multiple of `dt`. The last one is the horizon.
    pub snapshots: Vec<f64>,
    /// Recompute the triangle density fed to the rates every this many steps.
    pub triangle_stride: usize,
    /// Map from ages to the types seen by the rates.
    pub transform: TypeTransform,
}

impl FluidConfig {
    pub fn new(m: usize, dt: f64, snapshots: Vec<f64>) -> Self {
        Self { m, dt, snapshots, triangle_stride: 1, transform: TypeTransform::Identity }
    }
}

#[derive(Clone, Debug)]
pub struct FluidSolution {
    pub snapshots: Vec<(f64, StepGraphon)>,
    /// Triangle density of each snapshot graphon.
    pub triangles: Vec<(f64, f64)>,
    /// Triangle densities fed to the rates, at every recomputation.
    pub rate_triangles: Vec<(f64, f64)>,
    /// Largest amount by which an update left `[0, 1]` before clamping.
    pub max_clamp: f64,
}

fn tri_index(a: usize, b: usize) -> usize {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi * (hi + 1) / 2 + lo
}

/// Solves for `g` driven by `path` and returns snapshots on an `m`-grid.
pub fn solve_gf(path: &DrivingPath, rates: &dyn EdgeRates, config: &FluidConfig) -> Result<FluidSolution> {
    if config.m == 0 {
        return Err(invalid("graphon resolution must be positive"));
    }
    if config.triangle_stride == 0 {
        return Err(invalid("triangle stride must be at least 1"));
    }
    if config.snapshots.is_empty() {
        return Err(invalid("need at least one snapshot time"));
    }
    if config.snapshots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("snapshot times must be strictly increasing"));
    }
    let horizon = *config.snapshots.last().expect("nonempty");
    if let Some(end) = path.end() {
        if horizon > end + 1e-9 * end.abs().max(1.0) {
            return Err(Error::OutOfRange(format!("driving path ends at {end}, before the horizon {horizon}")));
        }
    }
    let dt = config.dt;
    let snap_steps: Vec<usize> = config.snapshots.iter().map(|&s| grid_steps(s, dt)).collect::<Result<_>>()?;
    let bound = rates.bound();
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(invalid(format!("rate bound must be positive, got {bound}")));
    }
    if bound * dt > MAX_STABLE_STEP * (1.0 + 1e-9) {
        return Err(Error::UnstableStep(bound * dt));
    }
    let steps = *snap_steps.last().expect("nonempty");
    let transform = config.transform;
    let uses_graph = rates.uses_graph();

    let mut g = vec![0.0; (steps + 1) * (steps + 2) / 2];
    let mut masses = Vec::with_capacity(steps + 1);
    let mut types = Vec::with_capacity(steps + 1);
    let mut out = FluidSolution {
        snapshots: Vec::with_capacity(snap_steps.len()),
        triangles: Vec::with_capacity(snap_steps.len()),
        rate_triangles: Vec::new(),
        max_clamp: 0.0,
    };
    let mut next_snap = 0;
    let mut tri = 0.0;
    let check = |rate: f64, time: f64| -> Result<f64> {
        if !(rate >= 0.0) {
            return Err(invalid(format!("rate evaluated to {rate} at time {time}")));
        }
        if rate > bound * (1.0 + 1e-12) {
            return Err(Error::ThinningBound { rate, cmax: bound, time });
        }
        Ok(rate)
    };

    for k in 0..=steps {
        let t = k as f64 * dt;
        cohort_masses(path, k, dt, &mut masses)?;
        let mut current: Option<StepGraphon> = None;
        while next_snap < snap_steps.len() && snap_steps[next_snap] == k {
            let h = current.get_or_insert_with(|| to_grid(&g, &masses, config.m));
            out.triangles.push((config.snapshots[next_snap], triangle_density(h)));
            out.snapshots.push((config.snapshots[next_snap], h.clone()));
            next_snap += 1;
        }
        if k == steps {
            break;
        }
        if uses_graph && k % config.triangle_stride == 0 {
            let h = current.get_or_insert_with(|| to_grid(&g, &masses, config.m));
            tri = triangle_density(h);
            out.rate_triangles.push((t, tri));
        }

        // Euler step from t to t + dt for all pairs of cohorts with mass.
        types.clear();
        types.push(transform.apply(t));
        types.extend((1..=k).map(|j| transform.apply((k - j) as f64 * dt + 0.5 * dt)));
        for a in 0..=k {
            if masses[a] == 0.0 {
                continue;
            }
            for b in 0..=a {
                if masses[b] == 0.0 {
                    continue;
                }
                let input = RateInput { time: t, x: types[a], y: types[b], triangle_density: tri };
                let on = check(rates.activation(&input), t)?;
                let off = check(rates.deactivation(&input), t)?;
                let cell = &mut g[tri_index(a, b)];
                let next = *cell + dt * ((1.0 - *cell) * on - *cell * off);
                let excess = (next - 1.0).max(-next).max(0.0);
                out.max_clamp = out.max_clamp.max(excess);
                *cell = next.clamp(0.0, 1.0);
            }
        }
        // Cohort k + 1 is born at t + dt/2 on average: half a step of activation.
        let mid = t + 0.5 * dt;
        let newborn = transform.apply(0.0);
        for b in 0..=k + 1 {
            let age_b = if b == 0 { mid } else if b == k + 1 { 0.0 } else { (k - b + 1) as f64 * dt };
            let input = RateInput { time: mid, x: newborn, y: transform.apply(age_b), triangle_density: tri };
            let on = check(rates.activation(&input), mid)?;
            g[tri_index(k + 1, b)] = (0.5 * dt * on).min(1.0);
        }
    }
    debug_assert!(out.max_clamp <= 1e-12, "clamping exceeded 1e-12: {}", out.max_clamp);
    Ok(out)
}

/// Snapshots of `g` along the limit driving path.
pub fn fluid_limit(rates: &dyn EdgeRates, gamma: f64, config: &FluidConfig) -> Result<FluidSolution> {
    solve_gf(&DrivingPath::limit(gamma)?, rates, config)
}

/// Masses of cohorts `0..=k` at step `k`.
fn cohort_masses(path: &DrivingPath, k: usize, dt: f64, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    out.resize(k + 1, 0.0);
    let t = k as f64 * dt;
    match path {
        DrivingPath::Limit { gamma } => {
            out[0] = (-gamma * t).exp();
            let cell = -(-gamma * dt).exp_m1();
            for j in 1..=k {
                out[j] = (-gamma * (k - j) as f64 * dt).exp() * cell;
            }
        }
        DrivingPath::Empirical { .. } => {
            let (_, cdf) = path.empirical_slice(t)?.expect("empirical path");
            let w = 1.0 / cdf.len() as f64;
            for &age in cdf.sorted_values() {
                let j = if age >= t - 1e-12 {
                    0
                } else {
                    let back = (age / dt + 1e-9).floor() as usize;
                    k.saturating_sub(back).max(1)
                };
                out[j] += w;
            }
        }
    }
    Ok(())
}

/// Lays cohorts out youngest first on `[0, 1]` and averages `g` onto an
/// `m`-grid.
fn to_grid(g: &[f64], masses: &[f64], m: usize) -> StepGraphon {
    let k = masses.len() - 1;
    let order: Vec<usize> = (1..=k).rev().chain(std::iter::once(0)).filter(|&j| masses[j] > 0.0).collect();
    let total: f64 = order.iter().map(|&j| masses[j]).sum();
    // Cell overlaps of each cohort interval, as fractions of a cell.
    let mut overlaps: Vec<Vec<(usize, f64)>> = Vec::with_capacity(order.len());
    let mut start = 0.0;
    for &j in &order {
        let end = (start + masses[j] / total).min(1.0);
        let (lo, hi) = (start * m as f64, end * m as f64);
        let first = (lo.floor() as usize).min(m - 1);
        let last = ((hi.ceil() as usize).max(first + 1)).min(m);
        let cells = (first..last)
            .filter_map(|p| {
                let ov = hi.min((p + 1) as f64) - lo.max(p as f64);
                (ov > 0.0).then_some((p, ov))
            })
            .collect();
        overlaps.push(cells);
        start = end;
    }
    let len = order.len();
    let mut tmp = vec![0.0; m * len];
    for (ia, &a) in order.iter().enumerate() {
        for &(p, wp) in &overlaps[ia] {
            let row = &mut tmp[p * len..(p + 1) * len];
            for (ib, &b) in order.iter().enumerate() {
                row[ib] += wp * g[tri_index(a, b)];
            }
        }
    }
    let mut values = vec![0.0; m * m];
    for p in 0..m {
        let row = &tmp[p * len..(p + 1) * len];
        let out = &mut values[p * m..(p + 1) * m];
        for (ib, cells) in overlaps.iter().enumerate() {
            let v = row[ib];
            if v != 0.0 {
                for &(q, wq) in cells {
                    out[q] += wq * v;
                }
            }
        }
    }
    StepGraphon::from_values_clamped(m, values)
}
