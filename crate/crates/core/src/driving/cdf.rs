use std::io::{BufRead, Write};

use super::TypeTransform;
use crate::error::{invalid, Error, Result};

/// A distribution function on the real line.
pub trait Cdf: Send + Sync {
    /// `F(x)`, right-continuous.
    fn eval(&self, x: f64) -> f64;
    /// `F(x-)`.
    fn eval_left(&self, x: f64) -> f64;
    /// Right-continuous generalised inverse `inf{x : F(x) > u}` for `u` in `[0, 1)`.
    fn quantile(&self, u: f64) -> Result<f64>;
}

pub fn generalized_inverse(f: &dyn Cdf, u: f64) -> Result<f64> {
    f.quantile(u)
}

fn check_level(u: f64) -> Result<()> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::OutOfRange(format!("quantile level {u} not in [0, 1)")));
    }
    Ok(())
}

/// Empirical distribution of a finite sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("empirical distribution of an empty sample"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample values must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Kolmogorov distance `sup_x |F_n(x) - F(x)|` to another distribution.
    ///
    /// `F_n` is constant between sample points and `F` is monotone, so the
    /// supremum is attained at a sample point from the left or the right.
    pub fn sup_distance(&self, other: &dyn Cdf) -> f64 {
        let n = self.sorted.len() as f64;
        let mut best: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let below = i as f64 / n;
            let at = j as f64 / n;
            best = best.max((below - other.eval_left(x)).abs()).max((at - other.eval(x)).abs());
            i = j;
        }
        best
    }

    /// One sorted value per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.sorted {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut values = Vec::new();
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            values.push(line.parse().map_err(|_| Error::Parse(format!("bad number {line:?}")))?);
        }
        Self::new(values)
    }
}

impl Cdf for EmpiricalCdf {
    fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    fn eval_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v < x) as f64 / self.sorted.len() as f64
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        // The answer is the order statistic x_(j) with j = floor(u n) (0-based);
        // nudge j to absorb rounding in u * n.
        let n = self.sorted.len();
        let mut j = ((u * n as f64).floor() as usize).min(n - 1);
        while j + 1 < n && (j + 1) as f64 <= u * n as f64 {
            j += 1;
        }
        while j > 0 && j as f64 > u * n as f64 {
            j -= 1;
        }
        Ok(self.sorted[j])
    }
}

/// Limit distribution of vertex types at time `t`.
///
/// Ages are exponential with rate `gamma`, truncated at `t` with an atom of
/// mass `exp(-gamma t)` at `t` (vertices that have not rung yet); types are
/// the image of the ages under the transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitCdf {
    t: f64,
    gamma: f64,
    transform: TypeTransform,
}

/// Limit age distribution (identity transform).
pub fn limit_cdf(t: f64, gamma: f64) -> Result<LimitCdf> {
    LimitCdf::new(t, gamma, TypeTransform::Identity)
}

impl LimitCdf {
    pub fn new(t: f64, gamma: f64, transform: TypeTransform) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid(format!("time must be nonnegative, got {t}")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("clock rate must be nonnegative, got {gamma}")));
        }
        Ok(Self { t, gamma, transform })
    }

    /// Location of the atom (the type of a vertex that never rang).
    pub fn atom_location(&self) -> f64 {
        self.transform.apply(self.t)
    }

    pub fn atom_mass(&self) -> f64 {
        (-self.gamma * self.t).exp()
    }

    /// CDF of the continuous part evaluated at `x` below the atom.
    fn continuous(&self, x: f64) -> f64 {
        match self.transform {
            TypeTransform::Identity => -(-self.gamma * x).exp_m1(),
            // 1 - exp(-gamma * age) where age solves transform(age) = x.
            TypeTransform::Exp { gamma: g } => {
                let age = -(-x).ln_1p() / g;
                -(-self.gamma * age).exp_m1()
            }
        }
    }
}

impl Cdf for LimitCdf {
    fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if x >= self.atom_location() {
            1.0
        } else {
            self.continuous(x)
        }
    }

    fn eval_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x > self.atom_location() {
            1.0
        } else {
            self.continuous(x)
        }
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        if u >= 1.0 - self.atom_mass() {
            return Ok(self.atom_location());
        }
        let age = -(-u).ln_1p() / self.gamma;
        Ok(self.transform.apply(age).min(self.atom_location()))
    }
}

/// Uniform distribution on `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UniformCdf;

impl Cdf for UniformCdf {
    fn eval(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn eval_left(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        Ok(u)
    }
}
