//! Local-minimum rates along a grid of target densities, with branches
//! followed by continuation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::solver::Restricted;
use super::{solve_from_starts, solve_lower, sup_distance, trivial_solution, Direction, Multistart, VariationalProblem};
use crate::error::{invalid, Result};
use crate::ldp::DiscreteMeasure;

/// Largest sup-norm move between grid points still counted as the same
/// branch.
const BRANCH_JUMP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub e_star: f64,
    pub branch: usize,
    pub rate: f64,
    pub constraint_value: f64,
    pub kkt_residual: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub direction: Direction,
    pub branches: usize,
    pub rows: Vec<CurveRow>,
}

impl RateCurve {
    pub fn branch(&self, id: usize) -> impl Iterator<Item = &CurveRow> {
        self.rows.iter().filter(move |r| r.branch == id)
    }

    fn rate_at(&self, id: usize, e_star: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.branch == id && r.e_star == e_star).map(|r| r.rate)
    }

    /// Consecutive grid points `(lo, hi, a, b)` between which branches `a`
    /// and `b`, present at both points, swap their rate order.
    pub fn crossings(&self) -> Vec<(f64, f64, usize, usize)> {
        let mut grid: Vec<f64> = self.rows.iter().map(|r| r.e_star).collect();
        grid.dedup();
        let mut out = Vec::new();
        for w in grid.windows(2) {
            for a in 0..self.branches {
                for b in a + 1..self.branches {
                    let rates = (
                        self.rate_at(a, w[0]),
                        self.rate_at(b, w[0]),
                        self.rate_at(a, w[1]),
                        self.rate_at(b, w[1]),
                    );
                    if let (Some(a0), Some(b0), Some(a1), Some(b1)) = rates {
                        if (a0 - b0) * (a1 - b1) < 0.0 {
                            out.push((w[0], w[1], a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Columns `estar,branch,rate`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "estar,branch,rate")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.e_star, r.branch, r.rate)?;
        }
        Ok(())
    }
}

/// Rates of all local minima found at each target density of `grid`
/// (increasing). Each grid point is solved from the usual multistart set
/// plus the previous minima of every live branch.
pub fn rate_curve(q: &DiscreteMeasure, grid: &[f64], direction: Direction, options: Multistart) -> Result<RateCurve> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("the target grid must be nonempty and increasing"));
    }
    let mut rows = Vec::new();
    let mut live: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut branches = 0;
    for &e_star in grid {
        let problem = VariationalProblem::new(q.clone(), e_star, direction)?;
        let solutions = match (trivial_solution(&problem)?, direction) {
            (Some(s), _) => vec![s],
            (None, Direction::AtMost) => vec![solve_lower(&problem)?],
            (None, Direction::AtLeast) => {
                let restricted = Restricted::new(&problem);
                let mut starts = restricted.starting_points(options);
                for (_, w) in &live {
                    starts.push(restricted.index_weights(w));
                }
                solve_from_starts(&restricted, &starts)?
            }
        };
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (a, (_, prev)) in live.iter().enumerate() {
            for (s, sol) in solutions.iter().enumerate() {
                pairs.push((sup_distance(prev, sol.p.weights()), a, s));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut label: Vec<Option<usize>> = vec![None; solutions.len()];
        let mut taken = vec![false; live.len()];
        for (d, a, s) in pairs {
            if d < BRANCH_JUMP && !taken[a] && label[s].is_none() {
                taken[a] = true;
                label[s] = Some(live[a].0);
            }
        }
        live.clear();
        for (sol, l) in solutions.iter().zip(label) {
            let id = l.unwrap_or_else(|| {
                branches += 1;
                branches - 1
            });
            live.push((id, sol.p.weights().to_vec()));
            rows.push(CurveRow {
                e_star,
                branch: id,
                rate: sol.rate,
                constraint_value: sol.constraint_value,
                kkt_residual: sol.kkt_residual,
                weights: sol.p.weights().to_vec(),
            });
        }
    }
    Ok(RateCurve { direction, branches, rows })
}
