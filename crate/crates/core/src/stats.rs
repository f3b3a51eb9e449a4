//! Two-sample rank test used to compare simulator outputs.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Result of a Mann–Whitney U test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankTest {
    /// U statistic of the first sample.
    pub u: f64,
    /// Standardised statistic, with tie-corrected variance.
    pub z: f64,
    /// Two-sided p-value from the normal approximation.
    pub p_value: f64,
}

/// Mann–Whitney U test with midranks for ties and the normal
/// approximation (no continuity correction).
///
/// When every observation is tied the variance vanishes; the samples are
/// then indistinguishable and the p-value is 1.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> Result<RankTest> {
    if x.is_empty() || y.is_empty() {
        return Err(invalid("rank test needs two nonempty samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("rank test samples must be finite"));
    }
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let mut pooled: Vec<(f64, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let count = (j - i + 1) as f64;
        tie_term += count * count * count - count;
        rank_sum += midrank * pooled[i..=j].iter().filter(|p| p.1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    let n = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(RankTest { u, z: 0.0, p_value: 1.0 });
    }
    let z = (u - mean) / var.sqrt();
    let normal = Normal::standard();
    let p_value = (2.0 * normal.sf(z.abs())).min(1.0);
    Ok(RankTest { u, z, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force U: pairs with x > y count 1, ties 1/2.
    fn brute_u(x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .flat_map(|a| y.iter().map(move |b| if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 }))
            .sum()
    }

    #[test]
    fn u_matches_pair_count() {
        let x = [1.0, 3.0, 3.0, 7.0, 2.5];
        let y = [3.0, 0.5, 8.0, 2.5];
        let t = mann_whitney(&x, &y).unwrap();
        assert_eq!(t.u, brute_u(&x, &y));
    }

    #[test]
    fn separated_samples_are_significant() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let y: Vec<f64> = (100..150).map(f64::from).collect();
        let t = mann_whitney(&x, &y).unwrap();
        assert_eq!(t.u, 0.0);
        assert!(t.p_value < 1e-10);
    }

    #[test]
    fn known_example_without_ties() {
        // n1 = n2 = 10, U = 23: z = (23 - 50) / sqrt(175) = -2.0410.
        let x = [1., 2., 3., 4., 5., 6., 7., 9., 12., 20.];
        let y = [8., 10., 11., 13., 14., 15., 16., 17., 18., 19.];
        let t = mann_whitney(&x, &y).unwrap();
        assert_eq!(t.u, brute_u(&x, &y));
        assert!((t.z - (t.u - 50.0) / 175f64.sqrt()).abs() < 1e-12);
        assert!(t.p_value > 0.0 && t.p_value < 0.1);
    }

    #[test]
    fn identical_samples() {
        let t = mann_whitney(&[1.0; 5], &[1.0; 7]).unwrap();
        assert_eq!(t.p_value, 1.0);
        let t = mann_whitney(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }
}
