//! Cut norm and cut distance.
//!
//! For a block-constant kernel the supremum over measurable rectangles
//! `S x T` is attained on unions of blocks, so exact values reduce to a
//! finite enumeration. Arbitrary-resolution kernels get a lower bound from
//! alternating best responses with random restarts.

use itertools::Itertools;
use rand::Rng;

use super::{common_resolution, BlockKernel, StepGraphon};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, STREAM_RESTARTS};

pub const DEFAULT_RESTARTS: usize = 50;
pub const MAX_EXACT_BLOCKS: usize = 16;
pub const MAX_PERMUTATION_BLOCKS: usize = 8;

/// Exact cut norm of a block kernel by exhaustive enumeration of all
/// `2^k x 2^k` block-aligned rectangles (Gray-code order, O(4^k)).
pub fn exact_block_cut_norm(kernel: &BlockKernel) -> Result<f64> {
    let k = kernel.blocks();
    if k > MAX_EXACT_BLOCKS {
        return Err(Error::TooManyBlocks { blocks: k, max: MAX_EXACT_BLOCKS });
    }
    let w = kernel.weighted();
    let mut cols = vec![0.0; k];
    let mut in_s = vec![false; k];
    let mut best: f64 = 0.0;
    for s_step in 0..(1usize << k) {
        if s_step > 0 {
            let i = s_step.trailing_zeros() as usize;
            let sign = if in_s[i] { -1.0 } else { 1.0 };
            in_s[i] = !in_s[i];
            for j in 0..k {
                cols[j] += sign * w[i * k + j];
            }
        }
        let mut in_t = vec![false; k];
        let mut sum = 0.0;
        for t_step in 1..(1usize << k) {
            let j = t_step.trailing_zeros() as usize;
            if in_t[j] {
                sum -= cols[j];
            } else {
                sum += cols[j];
            }
            in_t[j] = !in_t[j];
            best = best.max(sum.abs());
        }
    }
    Ok(best)
}

/// Exact cut norm via enumeration of row sets only; for each `S` the best
/// column set takes all columns of one sign. O(2^k k).
pub(crate) fn best_response_cut_norm(kernel: &BlockKernel) -> Result<f64> {
    let k = kernel.blocks();
    if k > MAX_EXACT_BLOCKS {
        return Err(Error::TooManyBlocks { blocks: k, max: MAX_EXACT_BLOCKS });
    }
    let w = kernel.weighted();
    let mut cols = vec![0.0; k];
    let mut in_s = vec![false; k];
    let mut best: f64 = 0.0;
    for s_step in 1..(1usize << k) {
        let i = s_step.trailing_zeros() as usize;
        let sign = if in_s[i] { -1.0 } else { 1.0 };
        in_s[i] = !in_s[i];
        let mut pos = 0.0;
        let mut neg = 0.0;
        for j in 0..k {
            cols[j] += sign * w[i * k + j];
            if cols[j] > 0.0 {
                pos += cols[j];
            } else {
                neg -= cols[j];
            }
        }
        best = best.max(pos).max(neg);
    }
    Ok(best)
}

/// Lower bound on the cut norm of a signed kernel.
///
/// Each restart draws a random row set `S` and alternates: the best `T` for
/// fixed `S` keeps the columns whose sum over `S` has the target sign, and
/// symmetrically for `S` given `T`, until the value stops increasing. Both
/// signs are tried. The first restart starts from `S` = everything.
pub fn cut_norm_lower_bound(kernel: &BlockKernel, restarts: usize, seed: u64) -> Result<f64> {
    if restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    let k = kernel.blocks();
    let w = kernel.weighted();
    let mut rng = stream_rng(seed, STREAM_RESTARTS);
    let mut best: f64 = 0.0;
    let mut start = vec![true; k];
    for r in 0..restarts {
        if r > 0 {
            for s in start.iter_mut() {
                *s = rng.random_bool(0.5);
            }
        }
        for sign in [1.0, -1.0] {
            best = best.max(alternate(&w, k, &start, sign));
        }
    }
    Ok(best)
}

fn alternate(w: &[f64], k: usize, start: &[bool], sign: f64) -> f64 {
    let mut rows = start.to_vec();
    let mut cols = vec![false; k];
    let mut sums = vec![0.0; k];
    let mut best = f64::NEG_INFINITY;
    // Alternate between updating columns (given rows) and rows (given columns).
    for half in 0.. {
        let (fixed, free) = if half % 2 == 0 { (&rows, &mut cols) } else { (&cols, &mut rows) };
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (a, _) in fixed.iter().enumerate().filter(|(_, &on)| on) {
            for b in 0..k {
                // Kernel is symmetric, so row and column sums share one loop.
                sums[b] += w[a * k + b];
            }
        }
        let mut value = 0.0;
        for b in 0..k {
            free[b] = sign * sums[b] > 0.0;
            if free[b] {
                value += sign * sums[b];
            }
        }
        if value <= best + 1e-15 {
            break;
        }
        best = value;
    }
    best.max(0.0)
}

/// Lower bound on `d_cut(h1, h2)` (alternating maximisation on `h1 - h2`).
pub fn cut_distance(h1: &StepGraphon, h2: &StepGraphon, restarts: usize, seed: u64) -> Result<f64> {
    cut_norm_lower_bound(&h1.difference(h2)?, restarts, seed)
}

/// Block-permutation approximation of the cut metric.
///
/// Both graphons are coarsened (area-weighted) to `k <= max_blocks` equal
/// blocks, then the exact cut norm of `h1 - h2∘σ` is minimised over all block
/// permutations `σ`. The result is an upper bound on the cut metric of the
/// coarsened pair.
pub fn cut_metric_block_approx(h1: &StepGraphon, h2: &StepGraphon, max_blocks: usize) -> Result<f64> {
    if max_blocks > MAX_PERMUTATION_BLOCKS {
        return Err(Error::TooManyBlocks { blocks: max_blocks, max: MAX_PERMUTATION_BLOCKS });
    }
    if max_blocks == 0 {
        return Err(invalid("max_blocks must be at least 1"));
    }
    let (a, b) = common_resolution(h1, h2)?;
    let k = max_blocks.min(a.resolution());
    let a = a.resample(k)?;
    let b = b.resample(k)?;
    let mut best = f64::INFINITY;
    for perm in (0..k).permutations(k) {
        let d = best_response_cut_norm(&a.difference(&b.permuted(&perm)?)?)?;
        if d < best {
            best = d;
            if best == 0.0 {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_kernel(k: usize, rng: &mut ChaCha8Rng) -> BlockKernel {
        let mut v = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let x = rng.random_range(-1.0..1.0);
                v[i * k + j] = x;
                v[j * k + i] = x;
            }
        }
        BlockKernel::uniform(k, v).unwrap()
    }

    #[test]
    fn zero_and_constant_kernels() {
        let z = BlockKernel::uniform(4, vec![0.0; 16]).unwrap();
        assert_eq!(cut_norm_lower_bound(&z, 3, 0).unwrap(), 0.0);
        assert_eq!(exact_block_cut_norm(&z).unwrap(), 0.0);
        let c = StepGraphon::constant(10, 0.37).unwrap().to_kernel();
        assert!((cut_norm_lower_bound(&c, 1, 0).unwrap() - 0.37).abs() < 1e-12);
        let one = BlockKernel::uniform(1, vec![-0.8]).unwrap();
        assert!((exact_block_cut_norm(&one).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn checkerboard_two_blocks() {
        // Values +a on the diagonal blocks, -a off-diagonal: best rectangle is one block.
        let a = 0.6;
        let k = BlockKernel::uniform(2, vec![a, -a, -a, a]).unwrap();
        assert!((exact_block_cut_norm(&k).unwrap() - a / 4.0).abs() < 1e-15);
    }

    #[test]
    fn difference_of_constants() {
        let p = StepGraphon::constant(8, 0.3).unwrap();
        let q = StepGraphon::constant(8, 0.5).unwrap();
        let d = p.difference(&q).unwrap();
        assert!((exact_block_cut_norm(&d).unwrap() - 0.2).abs() < 1e-12);
        assert!((cut_distance(&p, &q, 5, 1).unwrap() - 0.2).abs() < 1e-12);
        assert!((cut_metric_block_approx(&p, &q, 4).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn best_response_enumeration_matches_full_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..=7 {
            let ker = random_kernel(k, &mut rng);
            let full = exact_block_cut_norm(&ker).unwrap();
            let fast = best_response_cut_norm(&ker).unwrap();
            assert!((full - fast).abs() < 1e-12, "k = {k}: {full} vs {fast}");
        }
    }

    #[test]
    fn lower_bound_on_six_block_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut hits = 0;
        for trial in 0..100 {
            let ker = random_kernel(6, &mut rng);
            let exact = exact_block_cut_norm(&ker).unwrap();
            let lb = cut_norm_lower_bound(&ker, 50, trial).unwrap();
            assert!(lb <= exact + 1e-12);
            if (lb - exact).abs() <= 1e-12 {
                hits += 1;
            }
        }
        assert!(hits >= 90, "{hits} of 100");
    }

    #[test]
    fn permutation_invariance_of_block_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = vec![0.0; 16];
        for i in 0..4 {
            for j in i..4 {
                let x: f64 = rng.random();
                v[i * 4 + j] = x;
                v[j * 4 + i] = x;
            }
        }
        let h = StepGraphon::new(4, v).unwrap();
        let g = h.permuted(&[2, 0, 3, 1]).unwrap();
        assert!(cut_metric_block_approx(&h, &g, 4).unwrap() < 1e-12);
        assert!(cut_distance(&h, &g, 10, 0).unwrap() > 0.0 || h == g);
        assert!(cut_metric_block_approx(&h, &h, 9).is_err());
    }

    #[test]
    fn refuses_too_many_blocks() {
        let k = BlockKernel::uniform(17, vec![0.0; 289]).unwrap();
        assert!(matches!(exact_block_cut_norm(&k), Err(Error::TooManyBlocks { .. })));
    }
}
