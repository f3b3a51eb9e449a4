//! The age process on a uniform grid and its rate functional.
//!
//! Measures on `[0, inf)` are stored as masses of the cells
//! `[j h, (j + 1) h)`. In time `t` (a multiple of `h`) a vertex of age `x`
//! either does not ring (probability `exp(-gamma t)`) and moves to age
//! `x + t`, or it rang and its age is `y` in `[0, t)` with density
//! `gamma exp(-gamma y)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{xlogxy, ExtReal};
use crate::error::{invalid, Error, Result};

/// Masses of the cells `[j h, (j + 1) h)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    pub h: f64,
    pub masses: Vec<f64>,
}

impl GridMeasure {
    pub fn new(h: f64, masses: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("cell width must be positive, got {h}")));
        }
        if masses.is_empty() {
            return Err(invalid("grid measure needs at least one cell"));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(invalid("cell masses must be nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 * masses.len() as f64 {
            return Err(invalid(format!("cell masses sum to {total}, expected 1")));
        }
        Ok(Self { h, masses })
    }

    /// Unit mass in the cell containing `x`.
    pub fn point_mass(x: f64, h: f64, cells: usize) -> Result<Self> {
        let c = cell_of(x, h);
        if c >= cells {
            return Err(Error::OutOfRange(format!("age {x} beyond the grid")));
        }
        let mut masses = vec![0.0; cells];
        masses[c] = 1.0;
        Self::new(h, masses)
    }

    pub fn cells(&self) -> usize {
        self.masses.len()
    }
}

fn cell_of(x: f64, h: f64) -> usize {
    (x / h + 1e-9).floor() as usize
}

/// Number of cells in `t`, which must be a positive multiple of `h`.
fn shift_cells(t: f64, h: f64) -> Result<usize> {
    let s = (t / h).round();
    if !(t > 0.0) || s < 1.0 || (s * h - t).abs() > 1e-9 * t {
        return Err(Error::MisalignedGrid(format!("time {t} is not a positive multiple of the cell width {h}")));
    }
    Ok(s as usize)
}

/// Cell masses of `gamma exp(-gamma y) dy` on `[0, t)`.
fn fresh_masses(t: f64, gamma: f64, h: f64, s: usize) -> Vec<f64> {
    (0..s)
        .map(|j| {
            let a = j as f64 * h;
            let b = ((j + 1) as f64 * h).min(t);
            (-gamma * a).exp() - (-gamma * b).exp()
        })
        .collect()
}

/// Transition law from age `x` over time `t`, on a grid of `cells` cells of
/// width `h`.
pub fn step_kernel(x: f64, t: f64, gamma: f64, h: f64, cells: usize) -> Result<GridMeasure> {
    if !(x >= 0.0) || !(gamma >= 0.0) {
        return Err(invalid("age and clock rate must be nonnegative"));
    }
    let s = shift_cells(t, h)?;
    let target = cell_of(x + t, h);
    if target >= cells {
        return Err(Error::OutOfRange(format!("age {} beyond the grid", x + t)));
    }
    let mut masses = vec![0.0; cells];
    masses[..s].copy_from_slice(&fresh_masses(t, gamma, h, s));
    masses[target] += (-gamma * t).exp();
    GridMeasure::new(h, masses)
}

/// One-step law of the age of a vertex drawn from `v`, after time `t`.
pub fn transition(v: &GridMeasure, t: f64, gamma: f64) -> Result<GridMeasure> {
    let h = v.h;
    let s = shift_cells(t, h)?;
    let cells = v.cells();
    let survive = (-gamma * t).exp();
    let mut masses = vec![0.0; cells];
    for (x, &a) in v.masses.iter().enumerate() {
        if a > 0.0 {
            if x + s >= cells {
                return Err(Error::OutOfRange("transported mass leaves the grid".into()));
            }
            masses[x + s] += survive * a;
        }
    }
    for (z, f) in fresh_masses(t, gamma, h, s).into_iter().enumerate() {
        masses[z] += f;
    }
    GridMeasure::new(h, masses)
}

/// The three terms of the one-step rate, in order: surviving mass against
/// the shifted initial law, reset mass against its source cells, and the
/// ages of the reset mass against the fresh-age law.
fn single_step_terms(v: &GridMeasure, mu: &GridMeasure, t: f64, gamma: f64) -> Result<[ExtReal; 3]> {
    if v.h != mu.h {
        return Err(Error::MisalignedGrid(format!("cell widths {} and {} differ", v.h, mu.h)));
    }
    let h = v.h;
    let s = shift_cells(t, h)?;
    let survive = (-gamma * t).exp();
    let cells = mu.cells();
    // Mass of mu in the fresh cells [0, t): the total reset mass.
    let reset: f64 = mu.masses[..s.min(cells)].iter().sum();

    let mut survivors = ExtReal::ZERO;
    let mut resets = ExtReal::ZERO;
    for x in 0..v.cells().max(cells.saturating_sub(s)) {
        let a = v.masses.get(x).copied().unwrap_or(0.0);
        let b = mu.masses.get(x + s).copied().unwrap_or(0.0);
        if a == 0.0 {
            if b > 0.0 {
                survivors = ExtReal::Infinite;
            }
            continue;
        }
        if x + s >= cells {
            return Err(Error::OutOfRange("transported mass leaves the grid".into()));
        }
        if b > a * (1.0 + 1e-12) {
            // More survivors than vertices started in the cell.
            resets = ExtReal::Infinite;
            continue;
        }
        let b = b.min(a);
        survivors = survivors + xlogxy(b, a * survive);
        resets = resets + xlogxy(a - b, a * reset);
    }
    let fresh = fresh_masses(t, gamma, h, s);
    let ages: ExtReal = mu.masses[..s.min(cells)].iter().zip(&fresh).map(|(&m, &f)| xlogxy(m, f)).sum();
    Ok([survivors, resets, ages])
}

/// Rate of moving the empirical age law from `v` to `mu` in time `t`.
pub fn single_step_rate(v: &GridMeasure, mu: &GridMeasure, t: f64, gamma: f64) -> Result<ExtReal> {
    Ok(single_step_terms(v, mu, t, gamma)?.into_iter().sum())
}

/// Relative entropy of `mu` with respect to the transition law from the
/// single age `x`; an independent route to the one-step rate when the
/// starting law is a point mass.
pub fn rate_crosscheck_oracle(x: f64, mu: &GridMeasure, t: f64, gamma: f64) -> Result<ExtReal> {
    let p = step_kernel(x, t, gamma, mu.h, mu.cells())?;
    Ok(mu.masses.iter().zip(&p.masses).map(|(&m, &q)| xlogxy(m, q)).sum())
}

/// A sequence of grid measures at increasing times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurePath {
    pub times: Vec<f64>,
    pub h: f64,
    pub masses: Vec<Vec<f64>>,
}

impl MeasurePath {
    pub fn new(times: Vec<f64>, h: f64, masses: Vec<Vec<f64>>) -> Result<Self> {
        let path = Self { times, h, masses };
        path.validate()?;
        Ok(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() < 2 || self.times.len() != self.masses.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times for {} slices (need at least two)",
                self.times.len(),
                self.masses.len()
            )));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("path times must be strictly increasing"));
        }
        let cells = self.masses[0].len();
        for m in &self.masses {
            if m.len() != cells {
                return Err(Error::MisalignedGrid("slices have different numbers of cells".into()));
            }
            GridMeasure::new(self.h, m.clone())?;
        }
        Ok(())
    }

    pub fn slice(&self, i: usize) -> GridMeasure {
        GridMeasure { h: self.h, masses: self.masses[i].clone() }
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let path: Self = serde_json::from_reader(input)?;
        path.validate()?;
        Ok(path)
    }
}

/// Forward difference of cell mass along the transport:
/// `(mu_{i+1}(cell + dt) - mu_i(cell)) / dt`, with `dt = t_{i+1} - t_i`.
pub fn shifted_derivative(path: &MeasurePath, i: usize, cell: usize) -> Result<f64> {
    if i + 1 >= path.times.len() {
        return Err(Error::OutOfRange(format!("no forward difference at slice {i}")));
    }
    let dt = path.times[i + 1] - path.times[i];
    let s = shift_cells(dt, path.h)?;
    let cells = path.masses[i].len();
    if cell >= cells {
        return Err(Error::OutOfRange(format!("cell {cell} beyond the grid")));
    }
    let ahead = path.masses[i + 1].get(cell + s).copied().unwrap_or(0.0);
    Ok((ahead - path.masses[i][cell]) / dt)
}

/// Path rate of a measure path, with its breakdowns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRate {
    /// Sum of the one-step rates between consecutive slices.
    pub k: ExtReal,
    /// Sums of the three one-step terms (survivors, resets, reset ages).
    pub terms: [ExtReal; 3],
    pub per_step: Vec<ExtReal>,
    /// Riemann sum of the continuous-time rate density, with shifted
    /// derivatives, reset density `first-cell mass / h` and the loss rate
    /// `-D` of each cell.
    pub riemann: ExtReal,
}

/// Evaluates the path rate of `path` for clock rate `gamma`.
///
/// The primary value telescopes the one-step rates, which is exact for the
/// discretely observed chain and reduces to [`single_step_rate`] for a
/// single step. The Riemann estimate evaluates the continuous-time density
///
/// `Σ_x [γ μ(x) - ℓ(x) + ℓ(x) log(ℓ(x) / (f μ(x)))] + f log(f / γ)`
///
/// per step, where `ℓ = -D` is the mass lost along the transport per unit
/// time and `f` the density of newborn ages.
pub fn path_rate(path: &MeasurePath, gamma: f64) -> Result<PathRate> {
    path.validate()?;
    if !(gamma >= 0.0) {
        return Err(invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let dt0 = path.times[1] - path.times[0];
    if path.times.windows(2).any(|w| ((w[1] - w[0]) - dt0).abs() > 1e-9 * dt0) {
        return Err(Error::MisalignedGrid("path times must be uniformly spaced".into()));
    }
    let mut terms = [ExtReal::ZERO; 3];
    let mut per_step = Vec::with_capacity(path.steps());
    let mut riemann = ExtReal::ZERO;
    for i in 0..path.steps() {
        let dt = path.times[i + 1] - path.times[i];
        let step = single_step_terms(&path.slice(i), &path.slice(i + 1), dt, gamma)?;
        for (acc, t) in terms.iter_mut().zip(step) {
            *acc = *acc + t;
        }
        per_step.push(step.into_iter().sum());
        riemann = riemann + riemann_step(path, i, gamma)?;
    }
    Ok(PathRate { k: terms.into_iter().sum(), terms, per_step, riemann })
}

fn riemann_step(path: &MeasurePath, i: usize, gamma: f64) -> Result<ExtReal> {
    let dt = path.times[i + 1] - path.times[i];
    let fresh = path.masses[i + 1][0] / path.h;
    let mut density = ExtReal::ZERO;
    for (cell, &m) in path.masses[i].iter().enumerate() {
        let loss = -shifted_derivative(path, i, cell)?;
        if loss < -1e-12 {
            // Mass appeared along the transport.
            return Ok(ExtReal::Infinite);
        }
        let loss = loss.max(0.0);
        density = density + ExtReal::Finite(gamma * m - loss);
        if loss > 0.0 {
            density = density + xlogxy(loss, fresh * m);
        }
    }
    density = density + xlogxy(fresh, gamma);
    Ok(match density {
        ExtReal::Finite(v) => ExtReal::Finite(v * dt),
        ExtReal::Infinite => ExtReal::Infinite,
    })
}

/// Law of the age process started at age 0, sampled every `dt` on a grid
/// of width `h` covering `[0, horizon]`.
pub fn typical_age_path(gamma: f64, horizon: f64, dt: f64, h: f64) -> Result<MeasurePath> {
    let steps = shift_cells(horizon, dt)?;
    shift_cells(dt, h)?;
    let cells = (horizon / h).round() as usize + 1;
    let mut slice = GridMeasure::point_mass(0.0, h, cells)?;
    let mut times = vec![0.0];
    let mut masses = vec![slice.masses.clone()];
    for k in 1..=steps {
        slice = transition(&slice, dt, gamma)?;
        times.push(k as f64 * dt);
        masses.push(slice.masses.clone());
    }
    MeasurePath::new(times, h, masses)
}
