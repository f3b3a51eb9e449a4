//! The computational subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use graphon_paths::driving::TypeTransform;
use graphon_paths::dynamics::{
    self, EdgeModel, EdgeProbability, EdgeRates, RateSpec, SimConfig, Trajectory, Variant,
};
use graphon_paths::fluid::{self, DrivingPath, FluidConfig, FluidSolution};
use graphon_paths::graphon::{self, StepGraphon};
use graphon_paths::ldp::{self, DiscreteMeasure, MeasurePath};
use graphon_paths::varopt::{self, CurveRow, Direction, Multistart, RateCurve, VariationalProblem};
use serde::Serialize;
use serde_json::json;

use crate::config::{
    check, config_error, read_file, required, CutdistConfig, FluidRunConfig, OptimizeConfig, RateConfig,
    SimulateConfig,
};
use crate::output::RunDir;

/// Quadrature steps for the frozen-uniform edge probability.
const FROZEN_QUADRATURE_STEPS: usize = 256;

fn rate_spec(lambda0: Option<f64>, lambda_tri: Option<f64>, mu_age: Option<f64>, cmax: Option<f64>) -> anyhow::Result<RateSpec> {
    let d = RateSpec::triangle_example();
    check(RateSpec::new(
        lambda0.unwrap_or(d.lambda0),
        lambda_tri.unwrap_or(d.lambda_tri),
        mu_age.unwrap_or(d.mu_age),
        cmax.unwrap_or(d.cmax),
    ))
}

fn write_graphon(run: &mut RunDir, stem: &str, h: &StepGraphon) -> anyhow::Result<()> {
    run.write(&format!("{stem}.pgm"), |out| Ok(graphon::to_pgm(h, out)?))?;
    run.write(&format!("{stem}.csv"), |out| Ok(graphon::to_csv(h, out)?))
}

/// Triangle densities of the recorded time series.
pub fn series_triangles(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.series.iter().map(|p| (p.time, p.triangle_density)).collect()
}

pub fn write_series(run: &mut RunDir, name: &str, header: &str, rows: &[(f64, f64)]) -> anyhow::Result<()> {
    run.write(name, |out| {
        writeln!(out, "{header}")?;
        for (t, v) in rows {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct SnapshotSummary {
    time: f64,
    edge_density: f64,
    triangle_density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    changes: Option<u64>,
}

pub struct SimulateRun {
    pub config: SimConfig,
    pub model: EdgeModel,
    pub path_steps: usize,
}

/// Fills defaults and validates a simulation configuration.
pub fn resolve_simulate(cfg: &mut SimulateConfig) -> anyhow::Result<SimulateRun> {
    let variant = required(&cfg.variant, "variant")?;
    let n = required(&cfg.n, "n")?;
    let gamma = *cfg.gamma.get_or_insert(3.0);
    let horizon = *cfg.horizon.get_or_insert(1.0);
    let seed = *cfg.seed.get_or_insert(1);
    let snapshots = cfg.snapshots.get_or_insert_with(|| vec![horizon]).clone();
    let series_steps = *cfg.series_steps.get_or_insert(100);
    let path_steps = *cfg.path_steps.get_or_insert(1000);
    if series_steps == 0 || path_steps == 0 {
        return Err(config_error("series-steps and path-steps must be positive"));
    }
    let model = match variant {
        Variant::Illustrative => {
            if cfg.lambda0.is_some() || cfg.lambda_tri.is_some() || cfg.mu_age.is_some() || cfg.cmax.is_some() {
                return Err(config_error("the illustrative variant takes --lambda only"));
            }
            let lambda = *cfg.lambda.get_or_insert(6.0);
            if !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(config_error(format!("lambda must be nonnegative, got {lambda}")));
            }
            EdgeModel::Illustrative { lambda }
        }
        Variant::MeanField | Variant::FrozenUniform => {
            if cfg.lambda.is_some() {
                return Err(config_error("--lambda applies to the illustrative variant only"));
            }
            let spec = rate_spec(cfg.lambda0, cfg.lambda_tri, cfg.mu_age, cfg.cmax)?;
            (cfg.lambda0, cfg.lambda_tri, cfg.mu_age, cfg.cmax) =
                (Some(spec.lambda0), Some(spec.lambda_tri), Some(spec.mu_age), Some(spec.cmax));
            if variant == Variant::MeanField {
                EdgeModel::MeanField(Arc::new(spec))
            } else {
                if spec.uses_graph() {
                    return Err(config_error("the frozen-uniform variant needs graph-independent rates (lambda-tri = 0)"));
                }
                EdgeModel::FrozenUniform(frozen_probability(spec))
            }
        }
    };
    let config = SimConfig {
        n,
        gamma,
        horizon,
        seed,
        snapshots,
        transform: variant.default_transform(gamma),
        series_step: Some(horizon / series_steps as f64),
        event_log_cap: dynamics::DEFAULT_EVENT_LOG_CAP,
    };
    check(config.validate())?;
    Ok(SimulateRun { config, model, path_steps })
}

/// Edge probability of graph-independent rates at raw ages.
pub fn frozen_probability(spec: RateSpec) -> EdgeProbability {
    Arc::new(move |t, x, y| fluid::integral_h(t, x.min(t), y.min(t), &spec, FROZEN_QUADRATURE_STEPS).unwrap_or(0.0))
}

pub fn write_trajectory(run: &mut RunDir, traj: &Trajectory, path_steps: usize) -> anyhow::Result<()> {
    let mut summaries = Vec::new();
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let h = graphon::empirical_graphon(&snap.graph);
        write_graphon(run, &format!("snapshot_{k:03}"), &h)?;
        summaries.push(SnapshotSummary {
            time: snap.time,
            edge_density: snap.graph.edge_density(),
            triangle_density: snap.graph.triangle_density(),
            changes: traj.window_changes.get(k).copied(),
        });
    }
    write_series(run, "triangles.csv", "time,triangle_density", &series_triangles(traj))?;
    run.write_json(
        "summary.json",
        &json!({
            "variant": traj.variant,
            "n": traj.n,
            "horizon": traj.horizon,
            "snapshots": summaries,
            "stats": traj.stats,
        }),
    )?;
    run.write("clocks.json", |out| Ok(traj.clocks.write_json(out)?))?;
    let path = DrivingPath::from_clocks_on_grid(&traj.clocks, traj.horizon / path_steps as f64, traj.horizon)?;
    run.write("driving_path.json", |out| Ok(path.write_json(out)?))
}

pub fn simulate(cfg: &mut SimulateConfig, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let run_cfg = resolve_simulate(cfg)?;
    let traj = dynamics::simulate(&run_cfg.config, &run_cfg.model)?;
    let mut run = RunDir::create(out, "simulate")?;
    write_trajectory(&mut run, &traj, run_cfg.path_steps)?;
    run.finish("simulate", cfg)
}

/// Triangle densities at every recomputation and at every snapshot, in
/// time order. Rates that ignore the graph have no recomputations.
pub fn triangle_curve(solution: &FluidSolution) -> Vec<(f64, f64)> {
    let mut curve: Vec<(f64, f64)> = solution.triangles.iter().chain(&solution.rate_triangles).copied().collect();
    // Stable sort: a snapshot value comes before a recomputation at the same time.
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    curve.dedup_by(|later, earlier| (later.0 - earlier.0).abs() < 1e-12);
    curve
}

pub fn fluid(cfg: &mut FluidRunConfig, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let m = *cfg.m.get_or_insert(64);
    let dt = *cfg.dt.get_or_insert(1.0 / 1200.0);
    let gamma = *cfg.gamma.get_or_insert(3.0);
    let snapshots = cfg.snapshots.get_or_insert_with(|| (1..=6).map(|k| k as f64 / 6.0).collect()).clone();
    let stride = *cfg.triangle_stride.get_or_insert(1);
    let spec = rate_spec(cfg.lambda0, cfg.lambda_tri, cfg.mu_age, cfg.cmax)?;
    (cfg.lambda0, cfg.lambda_tri, cfg.mu_age, cfg.cmax) =
        (Some(spec.lambda0), Some(spec.lambda_tri), Some(spec.mu_age), Some(spec.cmax));
    let config = FluidConfig { m, dt, snapshots, triangle_stride: stride, transform: TypeTransform::Identity };
    let path = match &cfg.driving_path {
        Some(file) => DrivingPath::read_json(read_file(file)?)
            .map_err(|e| config_error(format!("invalid driving path {}: {e}", file.display())))?,
        None => check(DrivingPath::limit(gamma))?,
    };
    let solution = match fluid::solve_gf(&path, &spec, &config) {
        Err(e @ (graphon_paths::Error::InvalidParameter(_)
        | graphon_paths::Error::MisalignedGrid(_)
        | graphon_paths::Error::UnstableStep(_)
        | graphon_paths::Error::OutOfRange(_))) => return Err(config_error(e.to_string())),
        r => r?,
    };
    let mut run = RunDir::create(out, "fluid")?;
    let mut summaries = Vec::new();
    for (k, (t, h)) in solution.snapshots.iter().enumerate() {
        write_graphon(&mut run, &format!("snapshot_{k:03}"), h)?;
        let tri = solution.triangles[k].1;
        summaries.push(SnapshotSummary { time: *t, edge_density: h.edge_density(), triangle_density: tri, changes: None });
    }
    write_series(&mut run, "triangles.csv", "time,triangle_density", &triangle_curve(&solution))?;
    run.write_json("summary.json", &json!({ "snapshots": summaries, "max_clamp": solution.max_clamp }))?;
    run.finish("fluid", cfg)
}

pub fn rate(cfg: &mut RateConfig, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let file = required(&cfg.path, "path")?;
    let gamma = required(&cfg.gamma, "gamma")?;
    let path = MeasurePath::read_json(read_file(&file)?)
        .map_err(|e| config_error(format!("invalid measure path {}: {e}", file.display())))?;
    match cfg.h {
        Some(h) if (h - path.h).abs() > 1e-12 * h.abs() => {
            return Err(config_error(format!("--h {h} does not match the path's cell width {}", path.h)));
        }
        _ => cfg.h = Some(path.h),
    }
    let result = match ldp::path_rate(&path, gamma) {
        Err(e @ (graphon_paths::Error::InvalidParameter(_) | graphon_paths::Error::MisalignedGrid(_))) => {
            return Err(config_error(e.to_string()));
        }
        r => r?,
    };
    let mut run = RunDir::create(out, "rate")?;
    run.write_json(
        "rate.json",
        &json!({
            "K": result.k,
            "terms": {
                "survivors": result.terms[0],
                "resets": result.terms[1],
                "reset_ages": result.terms[2],
            },
            "per_step": result.per_step,
            "riemann": result.riemann,
        }),
    )?;
    println!("{}", result.k);
    run.finish("rate", cfg)
}

/// `x:w,...` atoms or `model:gamma,lambda,T,bins`.
pub fn parse_reference(spec: &str) -> anyhow::Result<DiscreteMeasure> {
    if let Some(rest) = spec.strip_prefix("model:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 4 {
            return Err(config_error(format!("expected model:gamma,lambda,T,bins, got {spec:?}")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| config_error(format!("bad number {s:?} in {spec:?}")));
        let bins = parts[3].trim().parse::<usize>().map_err(|_| config_error(format!("bad bin count in {spec:?}")))?;
        return check(varopt::reference_measure_from_model(num(parts[0])?, num(parts[1])?, num(parts[2])?, bins));
    }
    let atoms = spec
        .split(',')
        .map(|atom| {
            let (x, w) = atom.split_once(':').ok_or_else(|| config_error(format!("atom {atom:?} is not x:w")))?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| config_error(format!("bad number {s:?} in atom {atom:?}")));
            Ok((parse(x)?, parse(w)?))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    check(DiscreteMeasure::from_atoms(&atoms))
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| config_error(format!("bad grid {spec:?} (expected lo:hi:step)"))))
        .collect::<anyhow::Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(config_error(format!("bad grid {spec:?} (expected lo:hi:step)")));
    };
    if !(step > 0.0) || !(hi >= lo) {
        return Err(config_error(format!("bad grid {spec:?}: need lo <= hi and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Larger solutions are only summarised on stdout.
const PRINTED_ATOMS: usize = 16;

pub fn optimize(cfg: &mut OptimizeConfig, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let q = parse_reference(&required(&cfg.q, "Q")?)?;
    let direction: Direction = check(required(&cfg.direction, "direction")?.parse())?;
    let starts = *cfg.starts.get_or_insert(varopt::DEFAULT_STARTS);
    let seed = *cfg.seed.get_or_insert(1);
    let options = Multistart { starts, seed };
    if starts == 0 {
        return Err(config_error("--starts must be at least 1"));
    }
    let grid = match (&cfg.estar, &cfg.estar_grid) {
        (Some(e), None) => vec![*e],
        (None, Some(g)) => parse_grid(g)?,
        _ => return Err(config_error("give exactly one of --estar and --estar-grid")),
    };
    let (lo, hi) = varopt::attainable_range(&q);
    for &e in &grid {
        check(VariationalProblem::new(q.clone(), e, direction))?;
        let outside = match direction {
            Direction::AtMost => e < lo - 1e-12,
            Direction::AtLeast => e > hi + 1e-12,
        };
        if outside {
            return Err(config_error(format!("target {e} is not attainable; the density functional ranges over [{lo}, {hi}]")));
        }
    }
    let mut run = RunDir::create(out, "optimize")?;
    let (solutions, curve) = if cfg.estar.is_some() {
        let problem = VariationalProblem::new(q.clone(), grid[0], direction)?;
        let solutions = match direction {
            Direction::AtMost => vec![varopt::solve_lower(&problem)?],
            Direction::AtLeast => varopt::solve_upper(&problem, options)?,
        };
        let rows = solutions
            .iter()
            .enumerate()
            .map(|(branch, s)| CurveRow {
                e_star: grid[0],
                branch,
                rate: s.rate,
                constraint_value: s.constraint_value,
                kkt_residual: s.kkt_residual,
                weights: s.p.weights().to_vec(),
            })
            .collect();
        let curve = RateCurve { direction, branches: solutions.len(), rows };
        (solutions, curve)
    } else {
        (Vec::new(), varopt::rate_curve(&q, &grid, direction, options)?)
    };
    run.write_json(
        "solutions.json",
        &json!({
            "direction": direction,
            "Q": q,
            "solutions": solutions,
            "branches": curve.branches,
            "rows": curve.rows,
            "crossings": curve.crossings(),
        }),
    )?;
    run.write("rate_curve.csv", |out| Ok(curve.write_csv(out)?))?;
    for s in &solutions {
        if s.p.len() <= PRINTED_ATOMS {
            println!("rate {} weights {:?}", s.rate, s.p.weights());
        } else {
            println!("rate {} ({} atoms, weights in solutions.json)", s.rate, s.p.len());
        }
    }
    run.finish("optimize", cfg)
}

/// `const:p`, `const:p:m` or `csv:PATH`.
pub fn parse_graphon(spec: &str) -> anyhow::Result<StepGraphon> {
    if let Some(rest) = spec.strip_prefix("const:") {
        let (p, m) = match rest.split_once(':') {
            Some((p, m)) => (p, m.parse::<usize>().map_err(|_| config_error(format!("bad resolution in {spec:?}")))?),
            None => (rest, 1),
        };
        let p = p.parse::<f64>().map_err(|_| config_error(format!("bad value in {spec:?}")))?;
        return check(StepGraphon::constant(m, p));
    }
    if let Some(file) = spec.strip_prefix("csv:") {
        let input = read_file(Path::new(file)).map_err(|e| config_error(e.to_string()))?;
        return graphon::read_csv(input).map_err(|e| config_error(format!("invalid graphon {file}: {e}")));
    }
    Err(config_error(format!("unknown graphon {spec:?} (expected const:p[:m] or csv:PATH)")))
}

pub fn cutdist(cfg: &mut CutdistConfig, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let a = parse_graphon(&required(&cfg.a, "a")?)?;
    let b = parse_graphon(&required(&cfg.b, "b")?)?;
    let restarts = *cfg.restarts.get_or_insert(graphon::DEFAULT_RESTARTS);
    let max_blocks = *cfg.max_blocks.get_or_insert(graphon::MAX_PERMUTATION_BLOCKS);
    let seed = *cfg.seed.get_or_insert(1);
    if restarts == 0 || max_blocks == 0 || max_blocks > graphon::MAX_PERMUTATION_BLOCKS {
        return Err(config_error(format!(
            "need restarts >= 1 and max-blocks in 1..={}",
            graphon::MAX_PERMUTATION_BLOCKS
        )));
    }
    let distance = graphon::cut_distance(&a, &b, restarts, seed).context("cut distance")?;
    let metric = graphon::cut_metric_block_approx(&a, &b, max_blocks)?;
    let l1 = graphon::l1_distance(&a, &b)?;
    let mut run = RunDir::create(out, "cutdist")?;
    run.write_json(
        "cutdist.json",
        &json!({ "cut_distance": distance, "cut_metric_block_approx": metric, "l1_distance": l1 }),
    )?;
    println!("{distance}");
    run.finish("cutdist", cfg)
}
