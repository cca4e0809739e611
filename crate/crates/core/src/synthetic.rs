//! Two-class Gaussian embeddings for tests, benchmarks and demos.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::store::{EmbeddingDataset, Label};

/// Isotropic unit-variance Gaussians. Class means sit at ∓`separation`/2 in
/// every coordinate, so each coordinate's means differ by `separation`
/// standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClasses {
    pub dim: usize,
    pub separation: f64,
    pub spoof_fraction: f64,
}

impl GaussianClasses {
    /// `n` samples; ids are `"{prefix}{index}"`. Labels alternate in a
    /// seeded random order with exactly `round(n · spoof_fraction)` spoofs.
    pub fn sample(&self, n: usize, seed: u64, prefix: &str) -> Result<EmbeddingDataset> {
        if self.dim == 0 || n == 0 {
            return Err(Error::InvalidConfig("synthetic data needs n, dim >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.spoof_fraction) {
            return Err(Error::InvalidConfig("spoof_fraction must be in [0, 1]".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_spoof = (n as f64 * self.spoof_fraction).round() as usize;
        let mut labels: Vec<Label> = (0..n).map(|i| Label::from_spoof(i < n_spoof)).collect();
        rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);

        let half = self.separation / 2.0;
        let mut features = Array2::<f32>::zeros((n, self.dim));
        for (mut row, label) in features.rows_mut().into_iter().zip(&labels) {
            let centre = if label.is_spoof() { half } else { -half };
            for v in row.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v = (centre + z) as f32;
            }
        }
        let ids = (0..n).map(|i| format!("{prefix}{i}")).collect();
        EmbeddingDataset::new(ids, features, labels, format!("gaussian-{prefix}"))
    }
}
