//! Reproducible per-path random streams.
//!
//! Every path draws from its own ChaCha8 stream selected by `path_index`
//! under a key derived from the master seed, so results never depend on how
//! paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type PathRng = ChaCha8Rng;

/// Deterministic stream for `(master_seed, path_index)`.
pub fn rng_stream(master_seed: u64, path_index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

#[inline]
pub fn standard_normal(rng: &mut PathRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Fills `out` with independent `N(0, variance)` draws.
#[inline]
pub fn fill_normal(rng: &mut PathRng, variance: f64, out: &mut [f64]) {
    let sd = variance.sqrt();
    for v in out {
        *v = sd * standard_normal(rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(seed: u64, idx: u64, n: usize) -> Vec<f64> {
        let mut rng = rng_stream(seed, idx);
        (0..n).map(|_| standard_normal(&mut rng)).collect()
    }

    #[test]
    fn same_key_same_stream() {
        assert_eq!(draws(42, 0, 1000), draws(42, 0, 1000));
        assert_ne!(draws(42, 0, 10), draws(43, 0, 10));
    }

    #[test]
    fn distinct_paths_are_uncorrelated() {
        let n = 10_000;
        let a = draws(42, 0, n);
        let b = draws(42, 1, n);
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let (ma, mb) = (mean(&a), mean(&b));
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        let rho = cov / (va * vb).sqrt();
        assert!(rho.abs() < 0.05, "rho = {rho}");
    }

    #[test]
    fn pooled_mean_is_centred() {
        let per_path = 1000;
        let pooled: Vec<f64> = (0..100).flat_map(|k| draws(42, k, per_path)).collect();
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let stderr = (var / n).sqrt();
        assert!(mean.abs() < 3.0 * stderr, "mean {mean}, stderr {stderr}");
    }
}
