use crate::error::{invalid, Result};

/// Simple graph on `n` labelled vertices with bit-packed adjacency rows and
/// an incrementally maintained triangle count.
///
/// Rows are stored in full (both `ij` and `ji` bits) so that the number of
/// common neighbours of an edge is a word-wise `AND` + popcount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edges: u64,
    triangles: u64,
}

impl LabeledGraph {
    /// Empty graph.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "graph needs at least one vertex");
        let words = n.div_ceil(64);
        Self { n, words, rows: vec![0; n * words], edges: 0, triangles: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(invalid(format!("invalid edge ({i}, {j}) for {n} vertices")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn triangle_count(&self) -> u64 {
        self.triangles
    }

    /// Triangle homomorphism density of the empirical graphon, `6 T / n^3`.
    pub fn triangle_density(&self) -> f64 {
        let n = self.n as f64;
        6.0 * self.triangles as f64 / (n * n * n)
    }

    /// Edge density of the empirical graphon, `2 E / n^2`.
    pub fn edge_density(&self) -> f64 {
        let n = self.n as f64;
        2.0 * self.edges as f64 / (n * n)
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Number of vertices adjacent to both `i` and `j`.
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> u64 {
        self.row(i).iter().zip(self.row(j)).map(|(a, b)| (a & b).count_ones() as u64).sum()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Sets the state of edge `ij`; returns whether the state changed.
    ///
    /// # Panics
    /// If `i == j` or either index is out of range.
    pub fn set_edge(&mut self, i: usize, j: usize, active: bool) -> bool {
        assert!(i != j, "self-loops are not allowed");
        assert!(i < self.n && j < self.n, "vertex out of range");
        if self.has_edge(i, j) == active {
            return false;
        }
        let common = self.common_neighbors(i, j);
        let (wi, bi) = (i * self.words + j / 64, 1u64 << (j % 64));
        let (wj, bj) = (j * self.words + i / 64, 1u64 << (i % 64));
        if active {
            self.rows[wi] |= bi;
            self.rows[wj] |= bj;
            self.edges += 1;
            self.triangles += common;
        } else {
            self.rows[wi] &= !bi;
            self.rows[wj] &= !bj;
            self.edges -= 1;
            self.triangles -= common;
        }
        true
    }

    pub fn toggle(&mut self, i: usize, j: usize) {
        let state = self.has_edge(i, j);
        self.set_edge(i, j, !state);
    }

    /// Removes every edge at `v` and returns the former neighbours.
    pub fn isolate(&mut self, v: usize) -> Vec<usize> {
        let nbrs: Vec<usize> = self.neighbors(v).collect();
        for &u in &nbrs {
            self.set_edge(v, u, false);
        }
        nbrs
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Full triangle recount from adjacency, independent of the running count.
    pub fn recount_triangles(&self) -> u64 {
        let mut t = 0;
        for (i, j) in self.edges() {
            t += self.common_neighbors(i, j);
        }
        t / 3
    }

    /// Graph with vertex `k` of the result being vertex `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.n, "permutation length");
        let mut inverse = vec![usize::MAX; self.n];
        for (k, &v) in perm.iter().enumerate() {
            inverse[v] = k;
        }
        let mut out = LabeledGraph::new(self.n);
        for (i, j) in self.edges() {
            let (a, b) = (inverse[i], inverse[j]);
            let (wa, ba) = (a * out.words + b / 64, 1u64 << (b % 64));
            let (wb, bb) = (b * out.words + a / 64, 1u64 << (a % 64));
            out.rows[wa] |= ba;
            out.rows[wb] |= bb;
        }
        out.edges = self.edges;
        out.triangles = self.triangles;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangle_count_survives_random_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [3, 17, 64, 65, 130] {
            let mut g = LabeledGraph::new(n);
            for _ in 0..10_000 {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                g.toggle(i, j);
            }
            assert_eq!(g.triangle_count(), g.recount_triangles(), "n = {n}");
            assert_eq!(g.edge_count() as usize, g.edges().count());
        }
    }

    #[test]
    fn complete_graph_counts() {
        let g = LabeledGraph::complete(10);
        assert_eq!(g.edge_count(), 45);
        assert_eq!(g.triangle_count(), 120);
        assert!((g.triangle_density() - 6.0 * 120.0 / 1000.0).abs() < 1e-15);
    }

    #[test]
    fn isolate_removes_incident_edges_only() {
        let mut g = LabeledGraph::complete(6);
        let removed = g.isolate(2);
        assert_eq!(removed, vec![0, 1, 3, 4, 5]);
        assert_eq!(g.degree(2), 0);
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g.triangle_count(), 10);
    }

    #[test]
    #[should_panic]
    fn self_loop_panics() {
        LabeledGraph::new(3).set_edge(1, 1, true);
    }

    #[test]
    fn permutation_preserves_structure() {
        let g = LabeledGraph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let perm = [4, 3, 2, 1, 0];
        let p = g.permuted(&perm);
        assert_eq!(p.triangle_count(), 1);
        assert_eq!(p.recount_triangles(), 1);
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    assert_eq!(p.has_edge(a, b), g.has_edge(perm[a], perm[b]));
                }
            }
        }
    }
}
