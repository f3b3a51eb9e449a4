//! Entropy minimisation under an edge-density constraint.
//!
//! For a reference law `Q` of the vertex types and a target density `e*`,
//! find the law `P << Q` minimising `Σ p log(p / q)` subject to
//! `E[min(X1, X2)] <= e*` (lower tail, convex) or `>= e*` (upper tail,
//! nonconvex, possibly several local minima). Continuous reference laws
//! are binned first, so the unknown is always a weight vector on `Q`'s
//! support.

mod curve;
mod solver;

pub use curve::{rate_curve, CurveRow, RateCurve};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ldp::DiscreteMeasure;
use crate::rng::derive_seed;

pub const DEFAULT_STARTS: usize = 64;
pub const DEFAULT_BINS: usize = 512;
/// Solutions closer than this in sup norm are the same local minimum.
pub const DEDUP_DISTANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

impl Direction {
    /// Sign turning the constraint into `sign (e(P) - e*) <= 0`.
    fn sign(self) -> f64 {
        match self {
            Direction::AtMost => 1.0,
            Direction::AtLeast => -1.0,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at-most" => Ok(Direction::AtMost),
            "at-least" => Ok(Direction::AtLeast),
            _ => Err(invalid(format!("unknown direction {s:?} (expected at-most or at-least)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalProblem {
    pub q: DiscreteMeasure,
    pub e_star: f64,
    pub direction: Direction,
}

impl VariationalProblem {
    pub fn new(q: DiscreteMeasure, e_star: f64, direction: Direction) -> Result<Self> {
        if !(0.0..=1.0).contains(&e_star) {
            return Err(Error::OutOfRange(format!("target edge density {e_star} outside [0, 1]")));
        }
        if q.points().iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::OutOfRange("reference support must lie in [0, 1]".into()));
        }
        Ok(Self { q, e_star, direction })
    }
}

/// A local minimiser with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub p: DiscreteMeasure,
    /// Relative entropy of `p` with respect to the reference law.
    pub rate: f64,
    pub constraint_value: f64,
    /// Lagrange multiplier of the density constraint; absent when the
    /// feasible set is a single point.
    pub multiplier: Option<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Options for the multistart upper-tail solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multistart {
    pub starts: usize,
    pub seed: u64,
}

impl Default for Multistart {
    fn default() -> Self {
        Self { starts: DEFAULT_STARTS, seed: 0 }
    }
}

/// `Σ_i Σ_j p_i p_j min(x_i, x_j)` for sorted points, in linear time.
pub fn edge_density_functional(p: &DiscreteMeasure) -> f64 {
    density(p.points(), p.weights())
}

pub(crate) fn density(x: &[f64], p: &[f64]) -> f64 {
    let mut above = 0.0;
    let mut total = 0.0;
    for i in (0..x.len()).rev() {
        total += p[i] * x[i] * (p[i] + 2.0 * above);
        above += p[i];
    }
    total
}

/// Gradient of the density functional: `2 Σ_j p_j min(x_k, x_j)`.
pub fn edge_density_gradient(p: &DiscreteMeasure) -> Vec<f64> {
    gradient(p.points(), p.weights())
}

pub(crate) fn gradient(x: &[f64], p: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut above = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        above[i] = above[i + 1] + p[i + 1];
    }
    let mut below = 0.0;
    (0..n)
        .map(|k| {
            below += p[k] * x[k];
            2.0 * (below + x[k] * above[k])
        })
        .collect()
}

/// Smallest and largest attainable values of the density functional over
/// laws absolutely continuous with respect to `q`: the point masses at the
/// extreme support points.
pub fn attainable_range(q: &DiscreteMeasure) -> (f64, f64) {
    let mut support = q.points().iter().zip(q.weights()).filter(|(_, &w)| w > 0.0).map(|(&x, _)| x);
    let lo = support.next().expect("a probability measure has positive mass");
    let hi = support.next_back().unwrap_or(lo);
    (lo, hi)
}

/// Type law at time `horizon` for the illustrative model with
/// `lambda == gamma`: uniform on `[0, 1 - e^{-gamma horizon})` (binned at
/// cell midpoints) plus the atom `e^{-gamma horizon}` at the right end.
pub fn reference_measure_from_model(gamma: f64, lambda: f64, horizon: f64, bins: usize) -> Result<DiscreteMeasure> {
    if !(gamma > 0.0) || !(horizon > 0.0) || !gamma.is_finite() || !horizon.is_finite() {
        return Err(invalid("gamma and the horizon must be positive"));
    }
    if (lambda - gamma).abs() > 1e-12 * gamma {
        return Err(invalid(format!(
            "the edge probability reduces to min(u, v) only when lambda equals gamma (got {lambda} and {gamma})"
        )));
    }
    if bins < 2 {
        return Err(invalid("at least two bins are needed"));
    }
    let edge = -(-gamma * horizon).exp_m1();
    let atom = (-gamma * horizon).exp();
    let width = edge / bins as f64;
    let mut atoms: Vec<(f64, f64)> = (0..bins).map(|i| ((i as f64 + 0.5) * width, width)).collect();
    atoms.push((edge, atom));
    let points = atoms.iter().map(|a| a.0).collect();
    let mut weights: Vec<f64> = atoms.iter().map(|a| a.1).collect();
    // Absorb rounding so that the total is exactly representable as 1.
    let total: f64 = weights.iter().sum();
    weights[bins] += 1.0 - total;
    DiscreteMeasure::new(points, weights)
}

/// Global minimiser of the convex lower-tail problem.
pub fn solve_lower(problem: &VariationalProblem) -> Result<Solution> {
    if problem.direction != Direction::AtMost {
        return Err(invalid("the lower-tail solver needs an at-most constraint"));
    }
    if let Some(trivial) = trivial_solution(problem)? {
        return Ok(trivial);
    }
    let restricted = solver::Restricted::new(problem);
    let start = restricted.q.clone();
    let raw = restricted.solve(&start)?;
    restricted.expand(raw)
}

/// All distinct local minima of the upper-tail problem found from
/// `options.starts` starting points, sorted by rate.
pub fn solve_upper(problem: &VariationalProblem, options: Multistart) -> Result<Vec<Solution>> {
    if problem.direction != Direction::AtLeast {
        return Err(invalid("the upper-tail solver needs an at-least constraint"));
    }
    if options.starts == 0 {
        return Err(invalid("at least one start is needed"));
    }
    if let Some(trivial) = trivial_solution(problem)? {
        return Ok(vec![trivial]);
    }
    let restricted = solver::Restricted::new(problem);
    let starts = restricted.starting_points(options);
    solve_from_starts(&restricted, &starts)
}

pub(crate) fn solve_from_starts(restricted: &solver::Restricted, starts: &[Vec<f64>]) -> Result<Vec<Solution>> {
    let results: Vec<_> = starts.par_iter().map(|s| restricted.solve(s)).collect();
    let mut found = Vec::new();
    for r in results {
        let s = r?;
        if restricted.is_local_minimum(&s) {
            let solution = restricted.expand(s)?;
            if solution.converged {
                found.push(solution);
            }
        }
    }
    let mut solutions = dedup(found);
    if solutions.is_empty() {
        return Err(Error::Infeasible("no start converged to a local minimum".into()));
    }
    solutions.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    Ok(solutions)
}

/// Point-mass and inactive-constraint cases, plus infeasibility.
fn trivial_solution(problem: &VariationalProblem) -> Result<Option<Solution>> {
    let q = &problem.q;
    let e_q = edge_density_functional(q);
    let sign = problem.direction.sign();
    if sign * (e_q - problem.e_star) <= 0.0 {
        return Ok(Some(Solution {
            p: q.clone(),
            rate: 0.0,
            constraint_value: e_q,
            multiplier: Some(0.0),
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        }));
    }
    let (lo, hi) = attainable_range(q);
    let extreme = match problem.direction {
        Direction::AtMost => lo,
        Direction::AtLeast => hi,
    };
    let gap = sign * (extreme - problem.e_star);
    if gap > 1e-12 {
        return Err(Error::Infeasible(format!(
            "target edge density {} is not attainable (extreme value {extreme})",
            problem.e_star
        )));
    }
    if gap >= -1e-12 {
        let k = q.points().iter().position(|&x| x == extreme).expect("extreme point in support");
        let mut weights = vec![0.0; q.len()];
        weights[k] = 1.0;
        return Ok(Some(Solution {
            p: q.with_weights(weights)?,
            rate: -q.weights()[k].ln(),
            constraint_value: extreme,
            multiplier: None,
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        }));
    }
    Ok(None)
}

fn dedup(solutions: Vec<Solution>) -> Vec<Solution> {
    let mut kept: Vec<Solution> = Vec::new();
    for s in solutions {
        match kept.iter_mut().find(|k| sup_distance(k.p.weights(), s.p.weights()) < DEDUP_DISTANCE) {
            Some(k) => {
                if s.kkt_residual < k.kkt_residual {
                    *k = s;
                }
            }
            None => kept.push(s),
        }
    }
    kept
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Independent KKT residual: the spread over the support of
/// `log(p/q) + sign * multiplier * gradient`, together with dual
/// feasibility and complementary slackness.
pub fn kkt_residual(problem: &VariationalProblem, p: &DiscreteMeasure, multiplier: f64) -> f64 {
    let sign = problem.direction.sign();
    let grad = edge_density_gradient(p);
    let stationarity: Vec<f64> = p
        .weights()
        .iter()
        .zip(problem.q.weights())
        .zip(&grad)
        .filter(|((_, &q), _)| q > 0.0)
        .map(|((&w, &q), &g)| (w / q).ln() + sign * multiplier * g)
        .collect();
    let lo = stationarity.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = stationarity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = sign * (edge_density_functional(p) - problem.e_star);
    (hi - lo).max((-multiplier).max(0.0)).max((multiplier * slack).abs()).max(slack.max(0.0))
}

fn random_start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d: f64| (d / total).max(1e-300)).collect()
}

impl solver::Restricted {
    /// `Q`, the smoothed constraint-extreme vertex, then Dirichlet(1) draws.
    fn starting_points(&self, options: Multistart) -> Vec<Vec<f64>> {
        let n = self.q.len();
        let mut starts = vec![self.q.clone()];
        let vertex = if self.sign > 0.0 { 0 } else { n - 1 };
        starts.push(self.q.iter().enumerate().map(|(i, &q)| if i == vertex { 0.99 + 0.01 * q } else { 0.01 * q }).collect());
        starts.extend((0..options.starts.saturating_sub(2) as u64).map(|i| random_start(n, derive_seed(options.seed, i))));
        starts.truncate(options.starts);
        starts
    }
}

#[cfg(test)]
mod tests;
