//! Graphons as equal-width step functions on the unit square.
//!
//! Every graphon that is handled numerically (empirical graphons of finite
//! graphs, induced reference graphons, fluid-limit snapshots) is stored as a
//! [`StepGraphon`]: a symmetric `m x m` grid of values in `[0, 1]`, where
//! cell `(i, j)` covers `[i/m, (i+1)/m) x [j/m, (j+1)/m)`.
//!
//! Signed differences of graphons are [`BlockKernel`]s, which also carry
//! (possibly unequal) block masses so that exact cut norms of block-constant
//! kernels can be enumerated.

mod cut;
mod graph;
mod io;
mod motif;

pub use cut::{
    cut_distance, cut_metric_block_approx, cut_norm_lower_bound, exact_block_cut_norm,
    DEFAULT_RESTARTS, MAX_EXACT_BLOCKS, MAX_PERMUTATION_BLOCKS,
};
pub use graph::LabeledGraph;
pub use io::{read_csv, to_csv, to_pgm};
pub use motif::{homomorphism_density, triangle_density, Motif, MAX_MOTIF_VERTICES};

use crate::error::{invalid, Error, Result};

/// Symmetric step function with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepGraphon {
    m: usize,
    values: Vec<f64>,
}

impl StepGraphon {
    /// Builds a graphon from row-major values, checking symmetry and range.
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("graphon resolution must be positive"));
        }
        if values.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for resolution {m}, got {}",
                m * m,
                values.len()
            )));
        }
        for i in 0..m {
            for j in 0..m {
                let v = values[i * m + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange(format!("value {v} at ({i}, {j}) not in [0, 1]")));
                }
                if j > i && v != values[j * m + i] {
                    return Err(invalid(format!("values not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { m, values })
    }

    pub fn zeros(m: usize) -> Self {
        assert!(m > 0, "graphon resolution must be positive");
        Self { m, values: vec![0.0; m * m] }
    }

    pub fn constant(m: usize, p: f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("graphon resolution must be positive"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("constant {p} not in [0, 1]")));
        }
        Ok(Self { m, values: vec![p; m * m] })
    }

    /// Samples `f` at cell centres. Only the upper triangle is evaluated and
    /// mirrored, so `f` need not be exactly symmetric in floating point.
    pub fn from_fn(m: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("graphon resolution must be positive"));
        }
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            let x = (i as f64 + 0.5) / m as f64;
            for j in i..m {
                let y = (j as f64 + 0.5) / m as f64;
                let v = f(x, y);
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Self::new(m, values)
    }

    /// Symmetrises and clamps arbitrary values into a valid graphon.
    pub(crate) fn from_values_clamped(m: usize, mut values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), m * m);
        for i in 0..m {
            for j in i..m {
                let v = (0.5 * (values[i * m + j] + values[j * m + i])).clamp(0.0, 1.0);
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Self { m, values }
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Double integral of the step function over the unit square.
    pub fn edge_density(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.m * self.m) as f64
    }

    /// Area-weighted block averaging onto an `m`-grid; preserves the integral.
    pub fn resample(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("graphon resolution must be positive"));
        }
        if m == self.m {
            return Ok(self.clone());
        }
        let w = overlap_weights(self.m, m);
        let values = apply_weights(&self.values, self.m, &w, m);
        Ok(Self::from_values_clamped(m, values))
    }

    /// Relabels blocks: the result at `(i, j)` is `self(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.m)?;
        let m = self.m;
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = self.values[perm[i] * m + perm[j]];
            }
        }
        Ok(Self { m, values })
    }

    /// Signed kernel `self - other` with uniform block masses; resamples to
    /// the finer of the two resolutions when they differ.
    pub fn difference(&self, other: &StepGraphon) -> Result<BlockKernel> {
        let (a, b) = common_resolution(self, other)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        BlockKernel::uniform(a.m, values)
    }

    pub fn to_kernel(&self) -> BlockKernel {
        BlockKernel { masses: vec![1.0 / self.m as f64; self.m], values: self.values.clone() }
    }
}

/// Brings two graphons onto a common grid (the finer resolution).
pub(crate) fn common_resolution(a: &StepGraphon, b: &StepGraphon) -> Result<(StepGraphon, StepGraphon)> {
    if a.m == b.m {
        return Ok((a.clone(), b.clone()));
    }
    let m = if a.m.is_multiple_of(b.m) {
        a.m
    } else if b.m.is_multiple_of(a.m) {
        b.m
    } else {
        lcm(a.m, b.m).min(4096).max(a.m.max(b.m))
    };
    Ok((a.resample(m)?, b.resample(m)?))
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

/// Mean of `|h1 - h2|` over the unit square.
pub fn l1_distance(h1: &StepGraphon, h2: &StepGraphon) -> Result<f64> {
    let (a, b) = common_resolution(h1, h2)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / (a.m * a.m) as f64)
}

/// Empirical graphon of a graph: block `(i, j)` is 1 iff `ij` is an edge.
pub fn empirical_graphon(g: &LabeledGraph) -> StepGraphon {
    let n = g.vertex_count();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in g.neighbors(i) {
            values[i * n + j] = 1.0;
        }
    }
    StepGraphon { m: n, values }
}

/// Symmetric real-valued block kernel with arbitrary positive block masses.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockKernel {
    masses: Vec<f64>,
    values: Vec<f64>,
}

impl BlockKernel {
    pub fn new(masses: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = masses.len();
        if k == 0 {
            return Err(invalid("kernel needs at least one block"));
        }
        if values.len() != k * k {
            return Err(Error::DimensionMismatch(format!("expected {} values, got {}", k * k, values.len())));
        }
        if masses.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(invalid("block masses must be positive"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("block masses sum to {total}, expected 1")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("kernel values must be finite"));
        }
        Ok(Self { masses, values })
    }

    pub fn uniform(k: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0 / k as f64; k], values)
    }

    pub fn blocks(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.masses.len() + j]
    }

    /// Integral of `|w|`, an upper bound for the cut norm.
    pub fn l1_norm(&self) -> f64 {
        let k = self.blocks();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += self.masses[i] * self.masses[j] * self.values[i * k + j].abs();
            }
        }
        s
    }

    /// Entries `a_i a_j w_ij`: the integral of the kernel over block `(i, j)`.
    pub(crate) fn weighted(&self) -> Vec<f64> {
        let k = self.blocks();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = self.masses[i] * self.masses[j] * self.values[i * k + j];
            }
        }
        out
    }
}

fn check_permutation(perm: &[usize], m: usize) -> Result<()> {
    if perm.len() != m {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for {m} blocks", perm.len())));
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || seen[p] {
            return Err(invalid("not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// For each target cell, the source cells it overlaps and the overlap
/// fraction of the target cell.
pub(crate) fn overlap_weights(from: usize, to: usize) -> Vec<Vec<(usize, f64)>> {
    (0..to)
        .map(|a| {
            // Work in units of 1/(from*to) to keep boundaries exact.
            let lo = a * from;
            let hi = (a + 1) * from;
            let first = lo / to;
            let last = (hi - 1) / to;
            (first..=last)
                .filter_map(|i| {
                    let s_lo = i * to;
                    let s_hi = (i + 1) * to;
                    let ov = hi.min(s_hi).saturating_sub(lo.max(s_lo));
                    (ov > 0).then(|| (i, ov as f64 / from as f64))
                })
                .collect()
        })
        .collect()
}

/// `W V W^T` for a sparse row-stochastic `W`.
pub(crate) fn apply_weights(values: &[f64], from: usize, w: &[Vec<(usize, f64)>], to: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; to * from];
    for (a, row) in w.iter().enumerate() {
        for &(i, wi) in row {
            let src = &values[i * from..(i + 1) * from];
            let dst = &mut tmp[a * from..(a + 1) * from];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += wi * s;
            }
        }
    }
    let mut out = vec![0.0; to * to];
    for a in 0..to {
        for (b, row) in w.iter().enumerate() {
            out[a * to + b] = row.iter().map(|&(j, wj)| wj * tmp[a * from + j]).sum();
        }
    }
    out
}
