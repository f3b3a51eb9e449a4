//! Acceptance checks A1 to A12. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphon_paths::driving::{sample_clocks, ClockSchedule, TypeTransform};
use graphon_paths::dynamics::{
    self, run_replicas, EdgeModel, EdgeProbability, EdgeRates, FnRates, RateSpec, SimConfig,
};
use graphon_paths::fluid::{self, DrivingPath, FluidConfig, FluidSolution};
use graphon_paths::graphon::{
    self, cut_norm_lower_bound, exact_block_cut_norm, BlockKernel, LabeledGraph, Motif,
};
use graphon_paths::ldp::{path_rate, rate_crosscheck_oracle, single_step_rate, step_kernel, typical_age_path, GridMeasure};
use graphon_paths::ldp::DiscreteMeasure;
use graphon_paths::stats::mann_whitney;
use graphon_paths::varopt::{self, Direction, Multistart, VariationalProblem};
use graphon_paths::Result;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn num_q() -> DiscreteMeasure {
    DiscreteMeasure::new(vec![0.0, 0.1, 1.0], vec![0.799, 0.2, 0.001]).unwrap()
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn a1() -> Result<Outcome> {
    let start = Instant::now();
    let problem = VariationalProblem::new(num_q(), 0.085, Direction::AtLeast)?;
    let sols = varopt::solve_upper(&problem, Multistart { starts: 64, seed: 1 })?;
    let elapsed = start.elapsed();
    let targets = [[0.0782, 0.9159, 0.0059], [0.3728, 0.4020, 0.2252]];
    let errors: Vec<f64> = targets
        .iter()
        .map(|t| sols.iter().map(|s| sup_distance(s.p.weights(), t)).fold(f64::INFINITY, f64::min))
        .collect();
    let pass = sols.len() == 2 && errors.iter().all(|&e| e < 5e-3) && within(elapsed, Duration::from_secs(60));
    Ok(outcome(
        pass,
        format!("{} minima, errors {:.1e} {:.1e}, {:.1?}", sols.len(), errors[0], errors[1], elapsed),
    ))
}

fn a2() -> Result<Outcome> {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=100).map(|k| ((0.05 + 0.0025 * k as f64) * 1e12).round() / 1e12).collect();
    let curve = varopt::rate_curve(&num_q(), &grid, Direction::AtLeast, Multistart { starts: 64, seed: 1 })?;
    let elapsed = start.elapsed();
    let crossings = curve.crossings();
    let near: Vec<_> = crossings.iter().filter(|c| c.0 <= 0.095 && c.1 >= 0.075).collect();
    let pass = curve.branches >= 2 && !near.is_empty() && within(elapsed, Duration::from_secs(600));
    Ok(outcome(pass, format!("{} branches, crossings {crossings:?}, {:.1?}", curve.branches, elapsed)))
}

fn a3() -> Result<Outcome> {
    let start = Instant::now();
    let (lambda, gamma, reps) = (6.0, 3.0, 100_000);
    let pairs = [
        (0.05, 0.9),
        (0.1, 0.3),
        (0.2, 0.2),
        (0.3, 0.7),
        (0.45, 0.5),
        (0.5, 0.94),
        (0.6, 0.65),
        (0.75, 0.8),
        (0.9, 0.85),
        (0.93, 0.94),
    ];
    let age = |u: f64| -(-u).ln_1p() / gamma;
    let mut worst: f64 = 0.0;
    for (k, &(u, v)) in pairs.iter().enumerate() {
        let rings = vec![vec![1.0 - age(u)], vec![1.0 - age(v)]];
        let hits: usize = run_replicas(reps, 100 + k as u64, |seed| {
            let clocks = ClockSchedule::from_rings(gamma, 1.0, rings.clone())?;
            let t = dynamics::simulate_with_clocks(
                &SimConfig::new(2, gamma, 1.0, seed),
                &EdgeModel::Illustrative { lambda },
                clocks,
            )?;
            Ok(t.snapshots[0].graph.edge_count() as usize)
        })?
        .into_iter()
        .sum();
        let p = 1.0 - (1.0 - u.min(v)).powi(2);
        let est = hits as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        worst = worst.max((est - p).abs() / se);
    }
    let elapsed = start.elapsed();
    let pass = worst <= 3.0 && within(elapsed, Duration::from_secs(120));
    Ok(outcome(pass, format!("largest deviation {worst:.2} SE over {} pairs, {:.1?}", pairs.len(), elapsed)))
}

fn a4() -> Result<Outcome> {
    let (n, gamma, reps) = (100, 3.0, 100);
    let times = vec![0.25, 0.5, 1.0];
    // Graph-independent rates that depend on both ages and on time.
    let lambda = |t: f64, x: f64, y: f64| 2.0 + 4.0 * t + 6.0 * x.min(y);
    let mu = |_: f64, x: f64, y: f64| 20.0 * (x - y).powi(2);
    let rates = Arc::new(FnRates::new(
        move |r| lambda(r.time, r.x, r.y),
        move |r| mu(r.time, r.x, r.y),
        20.0,
        false,
    )?);
    let frozen: EdgeProbability = {
        let rates = rates.clone();
        Arc::new(move |t, x, y| fluid::integral_h(t, x.min(t), y.min(t), rates.as_ref(), 256).unwrap_or(f64::NAN))
    };
    let densities = run_replicas(reps, 4, |seed| {
        let mut config = SimConfig::new(n, gamma, 1.0, seed);
        config.snapshots = times.clone();
        config.transform = TypeTransform::Identity;
        let clocks = config.sample_clocks()?;
        let edge = |model: &EdgeModel| -> Result<Vec<f64>> {
            let t = dynamics::simulate_with_clocks(&config, model, clocks.clone())?;
            Ok(t.snapshots.iter().map(|s| s.graph.edge_density()).collect())
        };
        let rates: Arc<dyn EdgeRates> = rates.clone();
        Ok((edge(&EdgeModel::MeanField(rates))?, edge(&EdgeModel::FrozenUniform(frozen.clone()))?))
    })?;
    let mut p_values = Vec::new();
    for k in 0..times.len() {
        let a: Vec<f64> = densities.iter().map(|d| d.0[k]).collect();
        let b: Vec<f64> = densities.iter().map(|d| d.1[k]).collect();
        p_values.push(mann_whitney(&a, &b)?.p_value);
    }
    let pass = p_values.iter().all(|&p| p > 0.01);
    Ok(outcome(pass, format!("rank-test p-values {p_values:.3?} at t = {times:?}")))
}

fn a5() -> Result<Outcome> {
    let start = Instant::now();
    let (n, gamma, lambda, reps) = (200, 3.0, 6.0, 20);
    let distances = run_replicas(reps, 5, |seed| {
        let traj = dynamics::simulate_illustrative(&SimConfig::new(n, gamma, 1.0, seed), lambda)?;
        let snap = &traj.snapshots[0];
        let h = |u: f64, v: f64| fluid::closed_form_h(u, v, lambda, gamma).unwrap_or(f64::NAN);
        let reference = fluid::induced_graphon(&snap.cdf, h, n)?;
        graphon::cut_distance(&graphon::empirical_graphon(&snap.graph), &reference, graphon::DEFAULT_RESTARTS, seed)
    })?;
    let elapsed = start.elapsed();
    let good = distances.iter().filter(|&&d| d < 0.05).count();
    let worst = distances.iter().copied().fold(0.0, f64::max);
    let pass = good * 100 >= 95 * reps && within(elapsed, Duration::from_secs(300));
    Ok(outcome(pass, format!("{good}/{reps} below 0.05 (largest {worst:.4}), {:.1?}", elapsed)))
}

/// Cell averages of the exact constant-rate solution in quantile
/// coordinates of the limiting age law, by a `sub` x `sub` midpoint rule.
fn constant_rate_reference(lambda: f64, mu: f64, gamma: f64, t: f64, m: usize, sub: usize) -> Vec<f64> {
    let atom = -(-gamma * t).exp_m1();
    let age = |u: f64| if u < atom { -(-u).ln_1p() / gamma } else { t };
    let r = lambda + mu;
    let h = |a: f64| lambda / r * -(-r * a).exp_m1();
    let fine = m * sub;
    let ages: Vec<f64> = (0..fine).map(|i| age((i as f64 + 0.5) / fine as f64)).collect();
    let mut out = vec![0.0; m * m];
    for i in 0..fine {
        for j in 0..fine {
            out[(i / sub) * m + j / sub] += h(ages[i].min(ages[j]));
        }
    }
    out.iter_mut().for_each(|v| *v /= (sub * sub) as f64);
    out
}

fn a6() -> Result<Outcome> {
    let (lambda, mu, gamma, m) = (4.0, 2.0, 3.0, 256);
    let rates = FnRates::new(move |_| lambda, move |_| mu, lambda, false)?;
    let snapshots = vec![0.25, 0.5, 1.0];
    let references: Vec<Vec<f64>> =
        snapshots.iter().map(|&t| constant_rate_reference(lambda, mu, gamma, t, m, 4)).collect();
    let error = |dt: f64| -> Result<f64> {
        let sol = fluid::fluid_limit(&rates, gamma, &FluidConfig::new(m, dt, snapshots.clone()))?;
        Ok(sol
            .snapshots
            .iter()
            .zip(&references)
            .map(|((_, g), r)| sup_distance(g.values(), r))
            .fold(0.0, f64::max))
    };
    // The ratio is taken from dt = 1e-3 to its half. From 2e-3 the step is
    // still wider than the youngest cells and the ratio is reported only.
    let (coarse, base, half) = (error(2e-3)?, error(1e-3)?, error(5e-4)?);
    let ratio = base / half;
    let pass = base <= 5e-3 && (1.7..=2.3).contains(&ratio);
    Ok(outcome(
        pass,
        format!(
            "sup error {base:.2e} at dt = 1e-3, ratio {ratio:.3} from 1e-3 to 5e-4 ({:.3} from 2e-3 to 1e-3)",
            coarse / base
        ),
    ))
}

fn snapshot_triangles(sol: &FluidSolution) -> Vec<f64> {
    sol.snapshots.iter().map(|(_, g)| graphon::triangle_density(g)).collect()
}

fn a7() -> Result<Outcome> {
    let (gamma, dt, m, seeds) = (3.0, 1.0 / 1200.0, 64, 5);
    let spec = RateSpec::triangle_example();
    let config = FluidConfig::new(m, dt, (1..=6).map(|k| k as f64 / 6.0).collect());
    let limit = snapshot_triangles(&fluid::fluid_limit(&spec, gamma, &config)?);
    let mut means = Vec::new();
    for n in [100, 1000] {
        let mut total = 0.0;
        for seed in 0..seeds {
            let clocks = sample_clocks(n, gamma, 1.0, 7000 + seed)?;
            let path = DrivingPath::from_clocks_on_grid(&clocks, dt, 1.0)?;
            let tri = snapshot_triangles(&fluid::solve_gf(&path, &spec, &config)?);
            total += sup_distance(&tri, &limit);
        }
        means.push(total / seeds as f64);
    }
    let pass = means[1] < means[0];
    Ok(outcome(pass, format!("mean sup triangle gap {:.4} at n = 100, {:.4} at n = 1000", means[0], means[1])))
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.1e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn a8() -> Result<Outcome> {
    let gamma = 3.0;
    let mut k = Vec::new();
    let mut riemann = Vec::new();
    let mut wrong = Vec::new();
    for step in [0.1, 0.05, 0.025] {
        let path = typical_age_path(gamma, 1.0, step, step)?;
        let r = path_rate(&path, gamma)?;
        k.push(r.k.value());
        riemann.push(r.riemann.value().abs());
        wrong.push(path_rate(&path, 2.0 * gamma)?.k.value());
    }
    let pass = k.iter().all(|v| v.abs() <= 1e-9)
        && riemann.windows(2).all(|w| w[1] < w[0])
        && wrong.iter().all(|&v| v > 0.1);
    Ok(outcome(
        pass,
        format!("K {}, Riemann estimate {}, rate under doubled clock {wrong:.3?}", sci(&k), sci(&riemann)),
    ))
}

fn a9() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (h, cells, t, gamma) = (0.05, 40, 0.5, 3.0);
    let origin = GridMeasure::point_mass(0.0, h, cells)?;
    let kernel = step_kernel(0.0, t, gamma, h, cells)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut masses: Vec<f64> =
            kernel.masses.iter().map(|&q| if q > 0.0 { rng.random::<f64>() } else { 0.0 }).collect();
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|w| *w /= total);
        let mu = GridMeasure::new(h, masses)?;
        let a = single_step_rate(&origin, &mu, t, gamma)?.value();
        let b = rate_crosscheck_oracle(0.0, &mu, t, gamma)?.value();
        worst = worst.max((a - b).abs());
    }
    Ok(outcome(worst <= 1e-8, format!("largest difference {worst:.1e}")))
}

fn a10() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let q = num_q();
    let x = q.points().to_vec();
    let e_star = 0.05;
    let cross = |a: &[f64], b: &[f64]| {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..x.len() {
                s += a[i] * b[j] * x[i].min(x[j]);
            }
        }
        s
    };
    let (mut pairs, mut midpoint_violations, mut chain_violations, mut draws) = (0, 0, 0, 0);
    while pairs < 10_000 {
        let mut draw = || {
            let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| v / total).collect::<Vec<f64>>()
        };
        let (a, b) = (draw(), draw());
        draws += 1;
        let (ea, eb) = (cross(&a, &a), cross(&b, &b));
        if cross(&a, &b) > (ea * eb).sqrt() + 1e-15 {
            chain_violations += 1;
        }
        if ea <= e_star && eb <= e_star {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect();
            if varopt::edge_density_functional(&q.with_weights(mid)?) > e_star + 1e-15 {
                midpoint_violations += 1;
            }
            pairs += 1;
        }
    }
    let pass = midpoint_violations == 0 && chain_violations == 0;
    Ok(outcome(
        pass,
        format!(
            "{pairs} feasible pairs: {midpoint_violations} midpoint violations; {draws} pairs: {chain_violations} Cauchy-Schwarz violations"
        ),
    ))
}

fn a11() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut hits, mut exceeded) = (0, 0);
    for trial in 0..100 {
        let k = rng.random_range(1..=8);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let masses: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let mut values = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = rng.random_range(-1.0..1.0);
                values[i * k + j] = v;
                values[j * k + i] = v;
            }
        }
        let kernel = BlockKernel::new(masses, values)?;
        let exact = exact_block_cut_norm(&kernel)?;
        let bound = cut_norm_lower_bound(&kernel, 50, trial)?;
        if bound > exact + 1e-12 {
            exceeded += 1;
        }
        if (bound - exact).abs() <= 1e-12 {
            hits += 1;
        }
    }
    Ok(outcome(hits >= 90 && exceeded == 0, format!("{hits}/100 exact, {exceeded} above the exact value")))
}

fn a12() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let triangle = Motif::triangle();
    let mut mismatches = 0;
    for _ in 0..50 {
        let n: usize = rng.random_range(1..=50);
        let p: f64 = rng.random();
        let mut g = LabeledGraph::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    g.set_edge(i, j, true);
                }
            }
        }
        let mut count = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    if g.has_edge(i, j) && g.has_edge(j, k) && g.has_edge(i, k) {
                        count += 1;
                    }
                }
            }
        }
        let s = graphon::homomorphism_density(&graphon::empirical_graphon(&g), &triangle)?;
        let scaled = s * (n as f64).powi(3) / 6.0;
        if (scaled - count as f64).abs() > 1e-6 * (1.0 + count as f64) {
            mismatches += 1;
        }
    }
    Ok(outcome(mismatches == 0, format!("{mismatches} mismatches on 50 graphs")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 12] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
        ("A12", a12),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('A')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{name} {} ({:.1?}) {detail}", if pass { "PASS" } else { "FAIL" }, start.elapsed());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
