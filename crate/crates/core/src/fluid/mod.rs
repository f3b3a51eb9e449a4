//! Deterministic limits of the edge dynamics.
//!
//! For rates that ignore the graph, the probability that an edge between
//! vertices of ages `x_i`, `x_j` is active at time `t` is an explicit
//! integral along the common characteristic of the two ages
//! ([`integral_h`]); for the illustrative model it has the closed form
//! [`closed_form_h`]. Composing such an edge-probability function with the
//! quantile function of the type distribution gives the induced reference
//! graphon ([`induced_graphon`]).
//!
//! With graph-dependent rates there is no closed form and the edge
//! probabilities solve a transport-type differential equation, integrated by
//! [`solve_gf`] in birth-time (Lagrangian) coordinates.

mod path;
mod solver;

pub use path::DrivingPath;
pub use solver::{fluid_limit, solve_gf, FluidConfig, FluidSolution, MAX_STABLE_STEP};

use crate::driving::Cdf;
use crate::dynamics::{EdgeRates, RateInput};
use crate::error::{invalid, Error, Result};
use crate::graphon::StepGraphon;

pub const DEFAULT_QUADRATURE_STEPS: usize = 1024;

/// `1 - (1 - u ∧ v)^(lambda / gamma)`: the edge probability of the
/// illustrative model in exponential-type coordinates.
pub fn closed_form_h(u: f64, v: f64, lambda: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid(format!("closed form needs gamma > 0, got {gamma}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(format!("types ({u}, {v}) not in [0, 1]")));
    }
    Ok(-(lambda / gamma * (-u.min(v)).ln_1p()).exp_m1())
}

/// Edge probability for graph-independent rates,
///
/// `H = ∫_{t-a}^t λ(s) exp(-∫_s^t (λ + μ)(r) dr) ds`, `a = x_i ∧ x_j`,
///
/// where rates at time `s` see the ages `x_i - t + s`, `x_j - t + s`
/// (types are raw ages here). `H` is the solution at `t` of
/// `dH/ds = λ (1 - H) - μ H`, `H(t - a) = 0`; each of the `steps` intervals
/// is integrated exactly with rates frozen at its midpoint. This is exact
/// for constant rates and stays accurate when `μ` is stiff.
pub fn integral_h(t: f64, xi: f64, xj: f64, rates: &dyn EdgeRates, steps: usize) -> Result<f64> {
    if rates.uses_graph() {
        return Err(invalid("edge probabilities have no closed integral when rates read the graph"));
    }
    if steps == 0 {
        return Err(invalid("need at least one quadrature step"));
    }
    if !(xi >= 0.0 && xj >= 0.0) || xi.max(xj) > t + 1e-12 {
        return Err(Error::OutOfRange(format!("ages ({xi}, {xj}) must lie in [0, {t}]")));
    }
    let a = xi.min(xj);
    let h = a / steps as f64;
    let mut value: f64 = 0.0;
    for k in 0..steps {
        let s = t - a + (k as f64 + 0.5) * h;
        let input = RateInput { time: s, x: xi - t + s, y: xj - t + s, triangle_density: 0.0 };
        let on = rates.activation(&input);
        let total = on + rates.deactivation(&input);
        if total > 0.0 {
            let target = on / total;
            value = target + (value - target) * (-total * h).exp();
        }
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Induced reference graphon: `h(F̄((i + 1/2)/m), F̄((j + 1/2)/m))` on an
/// `m`-grid, where `F̄` is the generalised inverse of `cdf`.
pub fn induced_graphon(cdf: &dyn Cdf, h: impl Fn(f64, f64) -> f64, m: usize) -> Result<StepGraphon> {
    if m == 0 {
        return Err(invalid("graphon resolution must be positive"));
    }
    let q: Vec<f64> = (0..m).map(|i| cdf.quantile((i as f64 + 0.5) / m as f64)).collect::<Result<_>>()?;
    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = h(q[i], q[j]);
            values[i * m + j] = v;
            values[j * m + i] = v;
        }
    }
    StepGraphon::new(m, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::{limit_cdf, EmpiricalCdf, LimitCdf, TypeTransform, UniformCdf};
    use crate::dynamics::{FnRates, RateSpec};

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_h(0.0, 0.7, 6.0, 3.0).unwrap(), 0.0);
        assert_eq!(closed_form_h(0.4, 0.0, 6.0, 3.0).unwrap(), 0.0);
        assert!((closed_form_h(0.3, 0.8, 3.0, 3.0).unwrap() - 0.3).abs() < 1e-15);
        assert!((closed_form_h(0.5, 0.5, 6.0, 3.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(closed_form_h(0.5, 0.5, 6.0, 0.0).is_err());
    }

    #[test]
    fn integral_with_constant_rates() {
        let r = RateSpec::constant(6.0).unwrap();
        for (xi, xj) in [(0.3, 0.9), (1.0, 1.0), (0.05, 0.5)] {
            let h = integral_h(1.0, xi, xj, &r, DEFAULT_QUADRATURE_STEPS).unwrap();
            let exact = 1.0 - (-6.0 * f64::min(xi, xj)).exp();
            assert!((h - exact).abs() < 1e-6, "{h} vs {exact}");
        }
        let zero = RateSpec::new(0.0, 0.0, 5.0, 5.0).unwrap();
        assert_eq!(integral_h(1.0, 0.5, 0.5, &zero, 64).unwrap(), 0.0);
        let big_mu = FnRates::new(|_| 1.0, |_| 1e6, 1e6, false).unwrap();
        assert!(integral_h(1.0, 0.5, 0.8, &big_mu, DEFAULT_QUADRATURE_STEPS).unwrap() <= 1e-5);
        assert!(integral_h(1.0, 0.5, 0.8, &RateSpec::triangle_example(), 64).is_err());
    }

    #[test]
    fn integral_with_time_varying_rates_matches_double_quadrature() {
        let r = FnRates::new(|i| 1.0 + 4.0 * i.time, |i| 2.0 * i.x, 10.0, false).unwrap();
        let (t, xi, xj) = (0.9, 0.7, 0.8);
        let a: f64 = 0.7;
        // Direct evaluation of the nested integral by the trapezoid rule.
        let n = 20_000;
        let h = a / n as f64;
        let lam = |s: f64| 1.0 + 4.0 * s;
        let tot = |s: f64| lam(s) + 2.0 * (xi - t + s);
        let mut inner = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let s = t - a + k as f64 * h;
            inner[k] = inner[k + 1] + 0.5 * h * (tot(s) + tot(s + h));
        }
        let mut oracle = 0.0;
        for k in 0..=n {
            let s = t - a + k as f64 * h;
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            oracle += w * h * lam(s) * (-inner[k]).exp();
        }
        let value = integral_h(t, xi, xj, &r, DEFAULT_QUADRATURE_STEPS).unwrap();
        assert!((value - oracle).abs() < 1e-6, "{value} vs {oracle}");
    }

    #[test]
    fn integral_with_age_difference_deactivation() {
        // Ages differ by a constant along the characteristic, so the rates
        // are constant and H = λ/(λ+μ) (1 - exp(-(λ+μ) a)).
        let r = RateSpec::new(4.0, 0.0, 120.0, 120.0).unwrap();
        let (xi, xj) = (0.6, 0.35);
        let mu = 120.0 * 0.25f64.powi(2);
        let exact = 4.0 / (4.0 + mu) * (1.0 - (-(4.0 + mu) * 0.35f64).exp());
        let h = integral_h(1.0, xi, xj, &r, DEFAULT_QUADRATURE_STEPS).unwrap();
        assert!((h - exact).abs() < 1e-6);
    }

    #[test]
    fn induced_constant_and_uniform() {
        let g = induced_graphon(&UniformCdf, |_, _| 0.4, 16).unwrap();
        assert_eq!(g, StepGraphon::constant(16, 0.4).unwrap());
        let g = induced_graphon(&UniformCdf, f64::min, 300).unwrap();
        assert!((g.edge_density() - 1.0 / 3.0).abs() < 1.0 / 300.0);
        assert!(induced_graphon(&UniformCdf, |_, _| 1.5, 4).is_err());
    }

    #[test]
    fn induced_graphon_of_illustrative_limit() {
        // Types are exponential transforms of ages; below the atom they are
        // uniform, so the graphon is H evaluated at the quantile itself.
        let (gamma, lambda, m) = (3.0, 6.0, 64);
        let f = LimitCdf::new(1.0, gamma, TypeTransform::Exp { gamma }).unwrap();
        let g = induced_graphon(&f, |u, v| closed_form_h(u, v, lambda, gamma).unwrap(), m).unwrap();
        let atom = 1.0 - (-gamma).exp();
        for i in 0..m {
            for j in 0..m {
                let (x, y) = ((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
                let expected = if x.max(y) < atom {
                    1.0 - (1.0 - x.min(y)).powi(2)
                } else {
                    1.0 - (1.0 - x.min(y).min(atom)).powi(2)
                };
                assert!((g.get(i, j) - expected).abs() < 1e-12);
                if i + 1 < m {
                    assert!(g.get(i + 1, j) >= g.get(i, j));
                }
            }
        }
        // Same object in age coordinates: H in ages is 1 - exp(-λ a).
        let ages = limit_cdf(1.0, gamma).unwrap();
        let g2 = induced_graphon(&ages, |a, b| 1.0 - (-lambda * a.min(b)).exp(), m).unwrap();
        assert!(crate::graphon::l1_distance(&g, &g2).unwrap() < 1e-12);
    }

    #[test]
    fn induced_from_empirical() {
        let f = EmpiricalCdf::new(vec![0.2, 0.4, 0.6, 0.8]).unwrap();
        let g = induced_graphon(&f, f64::min, 4).unwrap();
        assert_eq!(g.get(0, 3), 0.2);
        assert_eq!(g.get(3, 3), 0.8);
    }
}
