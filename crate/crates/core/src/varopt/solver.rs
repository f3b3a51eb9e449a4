//! Augmented-Lagrangian exponentiated-gradient descent on the simplex,
//! finished by a Newton solve of the KKT system.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{density, gradient, kkt_residual, Solution, VariationalProblem};
use crate::error::Result;
use crate::ldp::relative_entropy;

pub(crate) const MAX_ITERATIONS: usize = 100_000;
/// Cap on mirror steps per augmented-Lagrangian subproblem.
const INNER_ITERATIONS: usize = 5_000;
pub(crate) const KKT_TOLERANCE: f64 = 1e-8;
pub(crate) const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// The problem restricted to the support of the reference law.
pub(crate) struct Restricted {
    pub problem: VariationalProblem,
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    log_q: Vec<f64>,
    index: Vec<usize>,
    pub sign: f64,
}

pub(crate) struct RawSolution {
    /// Log-weights on the restricted support.
    theta: Vec<f64>,
    multiplier: f64,
    iterations: usize,
    converged: bool,
}

fn normalise(theta: &mut [f64]) {
    let top = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = top + theta.iter().map(|t| (t - top).exp()).sum::<f64>().ln();
    theta.iter_mut().for_each(|t| *t -= lse);
}

fn weights(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|t| t.exp()).collect()
}

impl Restricted {
    pub fn new(problem: &VariationalProblem) -> Self {
        let mut x = Vec::new();
        let mut q = Vec::new();
        let mut index = Vec::new();
        for (i, (&xi, &qi)) in problem.q.points().iter().zip(problem.q.weights()).enumerate() {
            if qi > 0.0 {
                x.push(xi);
                q.push(qi);
                index.push(i);
            }
        }
        let log_q = q.iter().map(|w: &f64| w.ln()).collect();
        Self { sign: problem.direction.sign(), problem: problem.clone(), x, q, log_q, index }
    }

    fn constraint(&self, p: &[f64]) -> f64 {
        self.sign * (density(&self.x, p) - self.problem.e_star)
    }

    fn entropy(&self, theta: &[f64], p: &[f64]) -> f64 {
        p.iter().zip(theta).zip(&self.log_q).map(|((&w, &t), &lq)| if w > 0.0 { w * (t - lq) } else { 0.0 }).sum()
    }

    fn augmented(&self, theta: &[f64], p: &[f64], y: f64, rho: f64) -> f64 {
        let shifted = (y + rho * self.constraint(p)).max(0.0);
        self.entropy(theta, p) + (shifted * shifted - y * y) / (2.0 * rho)
    }

    fn augmented_gradient(&self, theta: &[f64], p: &[f64], y: f64, rho: f64) -> Vec<f64> {
        let m = (y + rho * self.constraint(p)).max(0.0) * self.sign;
        let g = gradient(&self.x, p);
        theta.iter().zip(&self.log_q).zip(g).map(|((&t, &lq), gk)| t - lq + 1.0 + m * gk).collect()
    }

    /// Mirror descent on the augmented Lagrangian until the spread of the
    /// gradient over the support drops below `tolerance`.
    fn inner(&self, theta: &mut Vec<f64>, y: f64, rho: f64, tolerance: f64, budget: &mut usize) {
        let mut eta: f64 = 1.0;
        let stop = budget.saturating_sub(INNER_ITERATIONS);
        while *budget > stop {
            let p = weights(theta);
            let grad = self.augmented_gradient(theta, &p, y, rho);
            let mean: f64 = p.iter().zip(&grad).map(|(a, b)| a * b).sum();
            let spread = grad.iter().map(|g| (g - mean).abs()).fold(0.0, f64::max);
            if spread < tolerance {
                return;
            }
            let value = self.augmented(theta, &p, y, rho);
            loop {
                let mut next: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t - eta * g).collect();
                normalise(&mut next);
                let pn = weights(&next);
                let linear: f64 = grad.iter().zip(pn.iter().zip(&p)).map(|(g, (a, b))| g * (a - b)).sum();
                let divergence: f64 = pn.iter().zip(next.iter().zip(theta.iter())).map(|(w, (a, b))| w * (a - b)).sum();
                let candidate = self.augmented(&next, &pn, y, rho);
                if candidate <= value + linear + divergence / eta + 1e-15 * value.abs() || eta < 1e-14 {
                    *theta = next;
                    break;
                }
                eta *= 0.5;
            }
            eta = (eta * 2.0).min(1.0);
            *budget -= 1;
        }
    }

    pub fn solve(&self, start: &[f64]) -> Result<RawSolution> {
        let mut theta: Vec<f64> = start.iter().map(|w| w.max(1e-300).ln()).collect();
        normalise(&mut theta);
        let mut budget = MAX_ITERATIONS;
        let (mut y, mut rho) = (0.0_f64, 1e4_f64);
        let mut tolerance = 1e-3;
        let mut previous = f64::INFINITY;
        let mut polished = None;
        // Loose augmented-Lagrangian solve first; tighten only if Newton
        // does not converge from there.
        for target in [1e-4, 1e-7] {
            while budget > 0 {
                self.inner(&mut theta, y, rho, tolerance, &mut budget);
                let c = self.constraint(&weights(&theta));
                let violation = c.max(-y / rho).abs();
                y = (y + rho * c).max(0.0);
                if violation < 0.1 * target && tolerance <= target {
                    break;
                }
                if violation > 0.25 * previous {
                    rho = (rho * 10.0).min(1e8);
                }
                previous = violation;
                tolerance = (tolerance * 0.1).max(target);
            }
            polished = self.polish(&theta, y);
            if polished.is_some() || budget == 0 {
                break;
            }
        }
        let iterations = MAX_ITERATIONS - budget;
        let (theta, multiplier, polished) = match polished {
            Some((t, m)) => (t, m, true),
            None => (theta, y, false),
        };
        Ok(RawSolution { theta, multiplier, iterations, converged: polished && multiplier >= 0.0 })
    }

    /// Newton's method on stationarity, normalisation and the active
    /// constraint, in log-weights so that iterates stay positive.
    fn polish(&self, theta: &[f64], y: f64) -> Option<(Vec<f64>, f64)> {
        let n = self.x.len();
        let residual = |z: &DVector<f64>| -> DVector<f64> {
            let p: Vec<f64> = (0..n).map(|k| z[k].exp()).collect();
            let g = gradient(&self.x, &p);
            let (nu, lambda) = (z[n], z[n + 1]);
            let mut f = DVector::zeros(n + 2);
            for k in 0..n {
                f[k] = z[k] - self.log_q[k] + nu + lambda * self.sign * g[k];
            }
            f[n] = p.iter().sum::<f64>() - 1.0;
            f[n + 1] = density(&self.x, &p) - self.problem.e_star;
            f
        };
        let p = weights(theta);
        let g = gradient(&self.x, &p);
        let nu: f64 = (0..n).map(|k| p[k] * (self.log_q[k] - theta[k] - y * self.sign * g[k])).sum();
        let mut z = DVector::from_iterator(n + 2, theta.iter().copied().chain([nu, y]));
        let mut f = residual(&z);
        for _ in 0..100 {
            if f.amax() < 1e-13 {
                break;
            }
            let p: Vec<f64> = (0..n).map(|k| z[k].exp()).collect();
            let g = gradient(&self.x, &p);
            let lambda = z[n + 1];
            let mut jac = DMatrix::zeros(n + 2, n + 2);
            for k in 0..n {
                for l in 0..n {
                    jac[(k, l)] = 2.0 * lambda * self.sign * self.x[k].min(self.x[l]) * p[l];
                }
                jac[(k, k)] += 1.0;
                jac[(k, n)] = 1.0;
                jac[(k, n + 1)] = self.sign * g[k];
                jac[(n, k)] = p[k];
                jac[(n + 1, k)] = g[k] * p[k];
            }
            let step = jac.lu().solve(&(-&f))?;
            let mut t = 1.0;
            loop {
                let trial = &z + &step * t;
                let ft = residual(&trial);
                if ft.norm() < f.norm() || t < 1e-6 {
                    z = trial;
                    f = ft;
                    break;
                }
                t *= 0.5;
            }
        }
        if !(f.amax() < 1e-11) {
            return None;
        }
        let mut theta: Vec<f64> = z.as_slice()[..n].to_vec();
        normalise(&mut theta);
        Some((theta, z[n + 1]))
    }

    /// Second-order check: the Hessian of the Lagrangian is positive
    /// semidefinite on the tangent space of the two constraints. Computed
    /// in the coordinates `d = sqrt(p) e`, which keeps the matrix well
    /// scaled when some weights are tiny.
    pub fn is_local_minimum(&self, raw: &RawSolution) -> bool {
        if !raw.converged {
            return false;
        }
        let n = self.x.len();
        let p = weights(&raw.theta);
        let g = gradient(&self.x, &p);
        let root: Vec<f64> = p.iter().map(|w| w.sqrt()).collect();
        let lambda = raw.multiplier * self.sign;
        let h = DMatrix::from_fn(n, n, |k, l| {
            let diag = if k == l { 1.0 } else { 0.0 };
            diag + 2.0 * lambda * root[k] * self.x[k].min(self.x[l]) * root[l]
        });
        let a = DMatrix::from_fn(2, n, |r, k| if r == 0 { root[k] } else { g[k] * root[k] });
        let gram = &a * a.transpose();
        let Some(gram_inv) = gram.try_inverse() else {
            // Degenerate tangent space (single support point).
            return true;
        };
        let proj = DMatrix::identity(n, n) - a.transpose() * gram_inv * &a;
        let reduced = &proj * h * &proj;
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        SymmetricEigen::new(reduced).eigenvalues.iter().all(|&e| e > -1e-9)
    }

    pub fn expand(&self, raw: RawSolution) -> Result<super::Solution> {
        let mut full = vec![0.0; self.problem.q.len()];
        for (&i, w) in self.index.iter().zip(weights(&raw.theta)) {
            full[i] = w;
        }
        let p = self.problem.q.with_weights(full)?;
        let rate = relative_entropy(&p, &self.problem.q)?.value();
        let constraint_value = super::edge_density_functional(&p);
        let kkt = kkt_residual(&self.problem, &p, raw.multiplier);
        let satisfied = self.sign * (constraint_value - self.problem.e_star) <= CONSTRAINT_TOLERANCE;
        Ok(Solution {
            p,
            rate,
            constraint_value,
            multiplier: Some(raw.multiplier),
            kkt_residual: kkt,
            iterations: raw.iterations,
            converged: raw.converged && kkt < KKT_TOLERANCE && satisfied,
        })
    }

    /// Restriction of full-support weights to the support of `Q`.
    pub fn index_weights(&self, full: &[f64]) -> Vec<f64> {
        self.index.iter().map(|&i| full[i]).collect()
    }
}
