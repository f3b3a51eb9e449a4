//! One-shot reproduction of the reference figures with pinned seeds.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use graphon_paths::driving::{sample_clocks, LimitCdf, TypeTransform};
use graphon_paths::dynamics::{self, RateSpec, SimConfig};
use graphon_paths::fluid::{self, DrivingPath, FluidConfig};
use graphon_paths::graphon::{self, StepGraphon};
use graphon_paths::ldp::DiscreteMeasure;
use graphon_paths::varopt::{self, Direction, Multistart, VariationalProblem};
use serde_json::json;

use crate::commands::triangle_curve;
use crate::config::config_error;
use crate::output::RunDir;

pub const FIGURES: [&str; 4] = ["fig1", "fig2", "fig-triangles", "fig3"];

const SEED: u64 = 1;
/// Step of the fluid runs; every sixth of the unit interval is a multiple.
const FLUID_DT: f64 = 1.0 / 1200.0;
const FLUID_M: usize = 64;

pub fn repro(figure: &str, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    if !FIGURES.contains(&figure) {
        return Err(config_error(format!("unknown figure {figure:?} (expected one of {})", FIGURES.join(", "))));
    }
    let mut run = RunDir::create(out, &format!("repro-{figure}"))?;
    let parameters = match figure {
        "fig1" => fig1(&mut run)?,
        "fig2" => fig2(&mut run)?,
        "fig-triangles" => fig_triangles(&mut run)?,
        _ => fig3(&mut run)?,
    };
    run.finish("repro", &json!({ "figure": figure, "parameters": parameters }))
}

fn write_graphon(run: &mut RunDir, stem: &str, h: &StepGraphon) -> anyhow::Result<()> {
    run.write(&format!("{stem}.pgm"), |out| Ok(graphon::to_pgm(h, out)?))?;
    run.write(&format!("{stem}.csv"), |out| Ok(graphon::to_csv(h, out)?))
}

/// Static versus dynamic labelling of the illustrative model, with the
/// induced reference graphons of the empirical and limiting type laws.
fn fig1(run: &mut RunDir) -> anyhow::Result<serde_json::Value> {
    let (n, gamma, lambda, t) = (100, 3.0, 6.0, 1.0);
    let config = SimConfig::new(n, gamma, t, SEED);
    let traj = dynamics::simulate_illustrative(&config, lambda)?;
    let snap = &traj.snapshots[0];
    let mut original = vec![0; n];
    for (k, &v) in snap.labels.iter().enumerate() {
        original[v] = k;
    }
    let dynamic = graphon::empirical_graphon(&snap.graph);
    let stat = graphon::empirical_graphon(&snap.graph.permuted(&original));
    let h = |u: f64, v: f64| fluid::closed_form_h(u, v, lambda, gamma).unwrap_or(0.0);
    let reference = fluid::induced_graphon(&snap.cdf, h, n)?;
    let limit = fluid::induced_graphon(&LimitCdf::new(t, gamma, TypeTransform::Exp { gamma })?, h, n)?;
    write_graphon(run, "static", &stat)?;
    write_graphon(run, "dynamic", &dynamic)?;
    write_graphon(run, "reference", &reference)?;
    write_graphon(run, "limit", &limit)?;
    let distances = json!({
        "static_to_reference": graphon::cut_distance(&stat, &reference, graphon::DEFAULT_RESTARTS, SEED)?,
        "dynamic_to_reference": graphon::cut_distance(&dynamic, &reference, graphon::DEFAULT_RESTARTS, SEED)?,
        "dynamic_to_limit": graphon::cut_distance(&dynamic, &limit, graphon::DEFAULT_RESTARTS, SEED)?,
    });
    run.write_json("summary.json", &json!({ "edge_density": snap.graph.edge_density(), "cut_distances": distances }))?;
    Ok(json!({ "n": n, "gamma": gamma, "lambda": lambda, "T": t, "seed": SEED }))
}

fn sixths() -> Vec<f64> {
    (1..=6).map(|k| k as f64 / 6.0).collect()
}

/// Mean-field simulation and fluid limit of the triangle-reinforced rates
/// at every sixth of the unit interval.
fn fig2(run: &mut RunDir) -> anyhow::Result<serde_json::Value> {
    let (n, gamma) = (100, 3.0);
    let spec = RateSpec::triangle_example();
    let mut config = SimConfig::new(n, gamma, 1.0, SEED);
    config.snapshots = sixths();
    config.transform = TypeTransform::Identity;
    let traj = dynamics::simulate_meanfield(&config, Arc::new(spec))?;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        write_graphon(run, &format!("simulation_{k}"), &graphon::empirical_graphon(&snap.graph))?;
    }
    let solution = fluid::fluid_limit(&spec, gamma, &FluidConfig::new(FLUID_M, FLUID_DT, sixths()))?;
    for (k, (_, h)) in solution.snapshots.iter().enumerate() {
        write_graphon(run, &format!("fluid_{k}"), h)?;
    }
    run.write("densities.csv", |out| {
        writeln!(out, "time,simulation_edge,simulation_triangle,fluid_edge,fluid_triangle")?;
        for (snap, ((t, h), (_, tri))) in traj.snapshots.iter().zip(solution.snapshots.iter().zip(&solution.triangles)) {
            writeln!(
                out,
                "{t},{},{},{},{tri}",
                snap.graph.edge_density(),
                snap.graph.triangle_density(),
                h.edge_density()
            )?;
        }
        Ok(())
    })?;
    Ok(json!({ "n": n, "gamma": gamma, "rates": spec, "m": FLUID_M, "dt": FLUID_DT, "seed": SEED }))
}

/// Triangle densities of the fluid equation driven by empirical type
/// paths of growing size, against the limit.
fn fig_triangles(run: &mut RunDir) -> anyhow::Result<serde_json::Value> {
    let gamma = 3.0;
    let spec = RateSpec::triangle_example();
    let fluid_config = FluidConfig::new(FLUID_M, FLUID_DT, vec![1.0]);
    let limit = fluid::fluid_limit(&spec, gamma, &fluid_config)?;

    let mut config = SimConfig::new(100, gamma, 1.0, SEED);
    config.transform = TypeTransform::Identity;
    config.series_step = Some(0.01);
    let traj = dynamics::simulate_meanfield(&config, Arc::new(spec))?;
    let mut curves = vec![triangle_curve(&limit)];
    let sizes = [100usize, 1000];
    for (k, &n) in sizes.iter().enumerate() {
        let clocks = if n == 100 { traj.clocks.clone() } else { sample_clocks(n, gamma, 1.0, SEED + k as u64)? };
        let path = DrivingPath::from_clocks_on_grid(&clocks, FLUID_DT, 1.0)?;
        curves.push(triangle_curve(&fluid::solve_gf(&path, &spec, &fluid_config)?));
    }
    run.write("triangles.csv", |out| {
        writeln!(out, "time,limit,empirical_100,empirical_1000")?;
        for i in 0..curves[0].len() {
            writeln!(out, "{},{},{},{}", curves[0][i].0, curves[0][i].1, curves[1][i].1, curves[2][i].1)?;
        }
        Ok(())
    })?;
    crate::commands::write_series(
        run,
        "simulation_triangles.csv",
        "time,triangle_density",
        &crate::commands::series_triangles(&traj),
    )?;
    Ok(json!({ "gamma": gamma, "rates": spec, "sizes": sizes, "m": FLUID_M, "dt": FLUID_DT, "seed": SEED }))
}

/// Upper-tail rate curve for the three-atom reference law.
fn fig3(run: &mut RunDir) -> anyhow::Result<serde_json::Value> {
    let q = DiscreteMeasure::new(vec![0.0, 0.1, 1.0], vec![0.799, 0.2, 0.001])?;
    let options = Multistart { starts: varopt::DEFAULT_STARTS, seed: SEED };
    let grid: Vec<f64> = (0..=100).map(|k| ((0.05 + 0.0025 * k as f64) * 1e12).round() / 1e12).collect();
    let curve = varopt::rate_curve(&q, &grid, Direction::AtLeast, options)?;
    run.write("rate_curve.csv", |out| Ok(curve.write_csv(out)?))?;
    let problem = VariationalProblem::new(q.clone(), 0.085, Direction::AtLeast)?;
    let solutions = varopt::solve_upper(&problem, options)?;
    run.write_json(
        "solutions.json",
        &json!({ "estar": 0.085, "solutions": solutions, "crossings": curve.crossings() }),
    )?;
    Ok(json!({ "Q": q, "grid": [0.05, 0.3, 0.0025], "starts": options.starts, "seed": SEED }))
}
