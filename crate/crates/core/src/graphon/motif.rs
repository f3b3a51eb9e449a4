//! Homomorphism densities of small motifs in step graphons.

use rayon::prelude::*;

use super::StepGraphon;
use crate::error::{invalid, Error, Result};

pub const MAX_MOTIF_VERTICES: usize = 5;

/// A small simple graph on vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Motif {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Motif {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(invalid("motif needs at least one vertex"));
        }
        let mut seen = Vec::new();
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(invalid(format!("motif edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(invalid("motif has a self-loop"));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(invalid(format!("duplicate motif edge ({a}, {b})")));
            }
            seen.push(key);
        }
        Ok(Self { vertices, edges: seen })
    }

    pub fn edge() -> Self {
        Self { vertices: 2, edges: vec![(0, 1)] }
    }

    pub fn triangle() -> Self {
        Self { vertices: 3, edges: vec![(0, 1), (0, 2), (1, 2)] }
    }

    pub fn path(vertices: usize) -> Result<Self> {
        Self::new(vertices, (1..vertices).map(|v| (v - 1, v)).collect())
    }

    pub fn cycle(vertices: usize) -> Result<Self> {
        if vertices < 3 {
            return Err(invalid("a cycle needs at least three vertices"));
        }
        Self::new(vertices, (0..vertices).map(|v| (v, (v + 1) % vertices)).collect())
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn is_triangle(&self) -> bool {
        self.vertices == 3 && self.edges.len() == 3
    }
}

/// Exact homomorphism density `t(motif, h)` of a step graphon: the average
/// over all `m^k` block assignments of the product of `h` along motif edges.
pub fn homomorphism_density(h: &StepGraphon, motif: &Motif) -> Result<f64> {
    let k = motif.vertices;
    if k > MAX_MOTIF_VERTICES {
        return Err(Error::MotifTooLarge { vertices: k, max: MAX_MOTIF_VERTICES });
    }
    if motif.edges.is_empty() {
        return Ok(1.0);
    }
    if motif.edges.len() == 1 {
        return Ok(h.edge_density());
    }
    if motif.is_triangle() {
        return Ok(triangle_density(h));
    }
    // Edges grouped by their later endpoint so that each factor is applied as
    // soon as both endpoints are assigned.
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(a, b) in &motif.edges {
        back[a.max(b)].push(a.min(b));
    }
    let m = h.resolution();
    let total: f64 = (0..m)
        .into_par_iter()
        .map(|first| {
            let mut assign = vec![0; k];
            assign[0] = first;
            accumulate(h, &back, &mut assign, 1, 1.0)
        })
        .sum();
    Ok(total / (m as f64).powi(k as i32))
}

fn accumulate(h: &StepGraphon, back: &[Vec<usize>], assign: &mut [usize], v: usize, partial: f64) -> f64 {
    if v == back.len() {
        return partial;
    }
    let mut sum = 0.0;
    for x in 0..h.resolution() {
        let row = h.row(x);
        let p = back[v].iter().fold(partial, |acc, &u| acc * row[assign[u]]);
        if p != 0.0 {
            assign[v] = x;
            sum += accumulate(h, back, assign, v + 1, p);
        }
    }
    sum
}

/// Triangle density `t(K3, h)` in O(m^3).
pub fn triangle_density(h: &StepGraphon) -> f64 {
    let m = h.resolution();
    let total: f64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let ri = h.row(i);
            let mut s = 0.0;
            for j in 0..m {
                let hij = ri[j];
                if hij != 0.0 {
                    let rj = h.row(j);
                    let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                    s += hij * dot;
                }
            }
            s
        })
        .sum();
    total / (m as f64).powi(3)
}
