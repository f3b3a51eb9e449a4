use std::io::{Read, Write};

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// Map from vertex age to vertex type.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypeTransform {
    /// `x = 1 - exp(-gamma * age)`: the type is the limiting age CDF, so
    /// types of a stationary population are uniform.
    Exp { gamma: f64 },
    /// `x = age`; only valid on horizons `T <= 1`.
    Identity,
}

impl TypeTransform {
    pub fn apply(&self, age: f64) -> f64 {
        match *self {
            TypeTransform::Exp { gamma } => -(-gamma * age).exp_m1(),
            TypeTransform::Identity => age,
        }
    }

    /// Checks that types stay in `[0, 1]` up to `horizon`.
    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        match *self {
            TypeTransform::Exp { gamma } if !(gamma >= 0.0) => Err(invalid("transform rate must be nonnegative")),
            TypeTransform::Identity if horizon > 1.0 => {
                Err(invalid(format!("identity type transform needs horizon <= 1, got {horizon}")))
            }
            _ => Ok(()),
        }
    }
}

/// Ages and types of all vertices at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeState {
    pub time: f64,
    pub ages: Vec<f64>,
    pub types: Vec<f64>,
}

/// Ring times of independent rate-`gamma` Poisson clocks on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockSchedule {
    gamma: f64,
    horizon: f64,
    rings: Vec<Vec<f64>>,
}

/// Samples one clock per vertex. Vertex `v` uses its own random stream, so
/// the schedule of a vertex does not depend on `n`.
pub fn sample_clocks(n: usize, gamma: f64, horizon: f64, seed: u64) -> Result<ClockSchedule> {
    if n == 0 {
        return Err(invalid("need at least one vertex"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("clock rate must be nonnegative, got {gamma}")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let rings = if gamma == 0.0 {
        vec![Vec::new(); n]
    } else {
        let exp = Exp::new(gamma).map_err(|e| invalid(e.to_string()))?;
        (0..n)
            .into_par_iter()
            .map(|v| {
                let mut rng = stream_rng(seed, v as u64);
                let mut out = Vec::new();
                let mut t = exp.sample(&mut rng);
                while t <= horizon {
                    out.push(t);
                    t += exp.sample(&mut rng);
                }
                out
            })
            .collect()
    };
    Ok(ClockSchedule { gamma, horizon, rings })
}

impl ClockSchedule {
    /// Builds a schedule from explicit ring times (strictly increasing per
    /// vertex, within `[0, horizon]`).
    pub fn from_rings(gamma: f64, horizon: f64, rings: Vec<Vec<f64>>) -> Result<Self> {
        if rings.is_empty() {
            return Err(invalid("need at least one vertex"));
        }
        if !(gamma >= 0.0) {
            return Err(invalid(format!("clock rate must be nonnegative, got {gamma}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        for (v, r) in rings.iter().enumerate() {
            if r.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
                return Err(Error::OutOfRange(format!("ring of vertex {v} outside [0, {horizon}]")));
            }
            if r.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!("ring times of vertex {v} not strictly increasing")));
            }
        }
        Ok(Self { gamma, horizon, rings })
    }

    pub fn vertex_count(&self) -> usize {
        self.rings.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rings(&self, v: usize) -> &[f64] {
        &self.rings[v]
    }

    pub fn total_rings(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfRange(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }

    /// Time since the last ring at or before `t` (a ring at exactly `t` gives 0).
    pub fn age_at(&self, v: usize, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.age_unchecked(v, t))
    }

    pub(crate) fn age_unchecked(&self, v: usize, t: f64) -> f64 {
        let r = &self.rings[v];
        let k = r.partition_point(|&s| s <= t);
        if k == 0 { t } else { t - r[k - 1] }
    }

    /// Age just before `t`, ignoring a ring at exactly `t`.
    pub fn age_left(&self, v: usize, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let r = &self.rings[v];
        let k = r.partition_point(|&s| s < t);
        Ok(if k == 0 { t } else { t - r[k - 1] })
    }

    pub fn type_at(&self, v: usize, t: f64, transform: TypeTransform) -> Result<f64> {
        transform.check_horizon(self.horizon)?;
        Ok(transform.apply(self.age_at(v, t)?))
    }

    pub fn state_at(&self, t: f64, transform: TypeTransform) -> Result<TypeState> {
        transform.check_horizon(self.horizon)?;
        self.check_time(t)?;
        let ages: Vec<f64> = (0..self.vertex_count()).map(|v| self.age_unchecked(v, t)).collect();
        let types = ages.iter().map(|&a| transform.apply(a)).collect();
        Ok(TypeState { time: t, ages, types })
    }

    /// All rings as `(time, vertex)` in increasing time order.
    pub fn ring_events(&self) -> Vec<(f64, usize)> {
        let mut ev: Vec<(f64, usize)> =
            self.rings.iter().enumerate().flat_map(|(v, r)| r.iter().map(move |&t| (t, v))).collect();
        ev.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ev
    }

    /// JSON array of per-vertex ring-time arrays.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, &self.rings)?;
        Ok(())
    }

    pub fn read_json<R: Read>(gamma: f64, horizon: f64, input: R) -> Result<Self> {
        let rings: Vec<Vec<f64>> = serde_json::from_reader(input)?;
        Self::from_rings(gamma, horizon, rings)
    }
}
