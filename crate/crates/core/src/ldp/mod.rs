//! Rate functionals of the large-deviation principles.
//!
//! Static edges given types are governed by Bernoulli relative entropy
//! ([`bernoulli_kl`], [`graphon_rate`]). The driving process (vertex ages
//! reset by Poisson clocks) has a path rate built from the one-step
//! transition kernel of the age process; see [`single_step_rate`] and
//! [`path_rate`].

mod age;

pub use age::{
    path_rate, rate_crosscheck_oracle, shifted_derivative, single_step_rate, step_kernel, transition,
    typical_age_path, GridMeasure, MeasurePath, PathRate,
};

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::graphon::StepGraphon;

/// A value in `[0, +inf]` (or any real, plus `+inf`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The value as an `f64`, with `+inf` for [`ExtReal::Infinite`].
    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY { ExtReal::Infinite } else { ExtReal::Finite(v) }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> Self {
        iter.fold(ExtReal::ZERO, Add::add)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtReal::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(ExtReal::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// `x log(x / y)` with `0 log 0 = 0` and `x log(x / 0) = +inf` for `x > 0`.
pub(crate) fn xlogxy(x: f64, y: f64) -> ExtReal {
    if x <= 0.0 {
        ExtReal::ZERO
    } else if y <= 0.0 {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(x * (x / y).ln())
    }
}

/// Relative entropy of Bernoulli(`a`) with respect to Bernoulli(`b`).
pub fn bernoulli_kl(a: f64, b: f64) -> ExtReal {
    xlogxy(a, b) + xlogxy(1.0 - a, 1.0 - b)
}

/// Average of [`bernoulli_kl`] over the cells of two equal-resolution graphons.
pub fn graphon_rate(h: &StepGraphon, r: &StepGraphon) -> Result<ExtReal> {
    if h.resolution() != r.resolution() {
        return Err(Error::DimensionMismatch(format!(
            "resolutions {} and {} differ",
            h.resolution(),
            r.resolution()
        )));
    }
    let cells = (h.resolution() * h.resolution()) as f64;
    let total: ExtReal = h.values().iter().zip(r.values()).map(|(&a, &b)| bernoulli_kl(a, b)).sum();
    Ok(match total {
        ExtReal::Finite(v) => ExtReal::Finite(v / cells),
        ExtReal::Infinite => ExtReal::Infinite,
    })
}

/// Probability weights on finitely many sorted points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
}

pub const MASS_TOLERANCE: f64 = 1e-12;

impl DiscreteMeasure {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!("{} points, {} weights", points.len(), weights.len())));
        }
        if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support points must be finite and strictly increasing"));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(invalid("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE * weights.len().max(1) as f64 {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    /// Builds a measure from unsorted `(point, weight)` pairs, merging
    /// duplicate points and normalising the weights.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut atoms = atoms.to_vec();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (x, w) in atoms {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(invalid(format!("weight {w} at {x} must be nonnegative")));
            }
            if points.last() == Some(&x) {
                *weights.last_mut().expect("nonempty") += w;
            } else {
                points.push(x);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("total weight must be positive"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(points, weights)
    }

    /// New weights on the same support (renormalised).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("total weight must be positive"));
        }
        Self::new(self.points.clone(), weights.into_iter().map(|w| w / total).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Σ p_i log(p_i / q_i)` for two measures on the same support.
pub fn relative_entropy(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<ExtReal> {
    if p.points != q.points {
        return Err(Error::DimensionMismatch("measures live on different supports".into()));
    }
    Ok(p.weights.iter().zip(&q.weights).map(|(&a, &b)| xlogxy(a, b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::cut_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_kl(0.5, 0.5), ExtReal::Finite(0.0));
        assert!((bernoulli_kl(1.0, 0.5).value() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(bernoulli_kl(0.5, 0.0), ExtReal::Infinite);
        assert_eq!(bernoulli_kl(0.0, 0.0), ExtReal::ZERO);
        assert_eq!(bernoulli_kl(1.0, 1.0), ExtReal::ZERO);
    }

    #[test]
    fn pinsker_type_bound_on_grid() {
        for i in 0..100 {
            for j in 0..100 {
                let (a, b) = (i as f64 / 99.0, j as f64 / 99.0);
                let kl = bernoulli_kl(a, b).value();
                assert!(kl >= 2.0 * (a - b) * (a - b) - 1e-15, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn graphon_rate_examples() {
        let r = StepGraphon::constant(4, 0.5).unwrap();
        assert_eq!(graphon_rate(&r, &r).unwrap(), ExtReal::ZERO);
        let h = StepGraphon::constant(4, 0.6).unwrap();
        assert!((graphon_rate(&h, &r).unwrap().value() - 0.020135513550688863).abs() < 1e-12);
        let mut v = vec![0.5; 16];
        v[0] = 0.0;
        let r0 = StepGraphon::new(4, v).unwrap();
        assert_eq!(graphon_rate(&h, &r0).unwrap(), ExtReal::Infinite);
        assert!(graphon_rate(&h, &StepGraphon::constant(3, 0.5).unwrap()).is_err());
    }

    #[test]
    fn graphon_rate_dominates_squared_cut_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for trial in 0..50 {
            let m = 6;
            let mut hv = vec![0.0; m * m];
            let mut rv = vec![0.0; m * m];
            for i in 0..m {
                for j in i..m {
                    let (a, b) = (rng.random::<f64>(), rng.random_range(0.05..0.95));
                    hv[i * m + j] = a;
                    hv[j * m + i] = a;
                    rv[i * m + j] = b;
                    rv[j * m + i] = b;
                }
            }
            let h = StepGraphon::new(m, hv).unwrap();
            let r = StepGraphon::new(m, rv).unwrap();
            let rate = graphon_rate(&h, &r).unwrap().value();
            let d = cut_distance(&h, &r, 20, trial).unwrap();
            assert!(rate >= d * d);
        }
    }

    #[test]
    fn ext_real_serialisation() {
        let v = vec![ExtReal::Finite(1.5), ExtReal::Infinite];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[1.5,"inf"]"#);
        assert_eq!(serde_json::from_str::<Vec<ExtReal>>(&s).unwrap(), v);
        assert!(ExtReal::Infinite > ExtReal::Finite(1e300));
    }

    #[test]
    fn discrete_measures() {
        assert!(DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        let q = DiscreteMeasure::from_atoms(&[(1.0, 1.0), (0.0, 2.0), (1.0, 1.0)]).unwrap();
        assert_eq!(q.points(), &[0.0, 1.0]);
        assert_eq!(q.weights(), &[0.5, 0.5]);
        let p = q.with_weights(vec![1.0, 0.0]).unwrap();
        assert!((relative_entropy(&p, &q).unwrap().value() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(relative_entropy(&q, &p).unwrap(), ExtReal::Infinite);
    }
}
