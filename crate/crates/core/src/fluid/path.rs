use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::driving::{limit_cdf, Cdf, ClockSchedule, EmpiricalCdf};
use crate::error::{invalid, Error, Result};

/// Age distribution of the vertices as a function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum DrivingPath {
    /// The deterministic limit: exponential(`gamma`) ages truncated at `t`.
    Limit { gamma: f64 },
    /// Empirical age distributions at increasing times, held constant
    /// between stored times.
    Empirical { times: Vec<f64>, slices: Vec<EmpiricalCdf> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathFile {
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

impl DrivingPath {
    pub fn limit(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("gamma must be nonnegative, got {gamma}")));
        }
        Ok(DrivingPath::Limit { gamma })
    }

    pub fn empirical(times: Vec<f64>, slices: Vec<EmpiricalCdf>) -> Result<Self> {
        if times.is_empty() || times.len() != slices.len() {
            return Err(Error::DimensionMismatch(format!("{} times for {} slices", times.len(), slices.len())));
        }
        if times[0] != 0.0 {
            return Err(invalid("driving path must start at time 0"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("driving path times must be strictly increasing"));
        }
        Ok(DrivingPath::Empirical { times, slices })
    }

    /// Empirical age distributions of a clock schedule at the given times.
    pub fn from_clocks(clocks: &ClockSchedule, times: &[f64]) -> Result<Self> {
        let slices = times
            .iter()
            .map(|&t| {
                let ages = (0..clocks.vertex_count()).map(|v| clocks.age_at(v, t)).collect::<Result<Vec<_>>>()?;
                EmpiricalCdf::new(ages)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::empirical(times.to_vec(), slices)
    }

    /// `from_clocks` on the grid `0, dt, 2 dt, ..., horizon`.
    pub fn from_clocks_on_grid(clocks: &ClockSchedule, dt: f64, horizon: f64) -> Result<Self> {
        let steps = grid_steps(horizon, dt)?;
        let times: Vec<f64> = (0..=steps).map(|k| (k as f64 * dt).min(horizon)).collect();
        Self::from_clocks(clocks, &times)
    }

    /// Last recorded time of an empirical path.
    pub fn end(&self) -> Option<f64> {
        match self {
            DrivingPath::Limit { .. } => None,
            DrivingPath::Empirical { times, .. } => times.last().copied(),
        }
    }

    /// Slice in force at time `t` (the last stored time `<= t`).
    pub fn slice(&self, t: f64) -> Result<Box<dyn Cdf>> {
        match self {
            DrivingPath::Limit { gamma } => Ok(Box::new(limit_cdf(t, *gamma)?)),
            DrivingPath::Empirical { times, slices } => Ok(Box::new(slices[self.slice_index(times, t)?].clone())),
        }
    }

    fn slice_index(&self, times: &[f64], t: f64) -> Result<usize> {
        if t < 0.0 {
            return Err(Error::OutOfRange(format!("time {t} before the start of the path")));
        }
        // Tolerate rounding in grid times.
        let k = times.partition_point(|&s| s <= t + 1e-9 * t.abs().max(1.0));
        Ok(k - 1)
    }

    /// Ages of the vertex sample in force at `t`, with the time they refer to.
    pub(crate) fn empirical_slice(&self, t: f64) -> Result<Option<(f64, &EmpiricalCdf)>> {
        match self {
            DrivingPath::Limit { .. } => Ok(None),
            DrivingPath::Empirical { times, slices } => {
                let k = self.slice_index(times, t)?;
                Ok(Some((times[k], &slices[k])))
            }
        }
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        match self {
            DrivingPath::Limit { .. } => Err(invalid("only empirical driving paths are serialised")),
            DrivingPath::Empirical { times, slices } => {
                let file = PathFile {
                    times: times.clone(),
                    samples: slices.iter().map(|s| s.sorted_values().to_vec()).collect(),
                };
                serde_json::to_writer(out, &file)?;
                Ok(())
            }
        }
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let file: PathFile = serde_json::from_reader(input)?;
        let slices = file.samples.into_iter().map(EmpiricalCdf::new).collect::<Result<Vec<_>>>()?;
        Self::empirical(file.times, slices)
    }
}

/// Number of `dt` steps in `horizon`, which must be a multiple of `dt`.
pub(crate) fn grid_steps(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    let k = (horizon / dt).round();
    if (k * dt - horizon).abs() > 1e-9 * horizon.max(dt) {
        return Err(Error::MisalignedGrid(format!("time {horizon} is not a multiple of the step {dt}")));
    }
    Ok(k as usize)
}
