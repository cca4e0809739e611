use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::EmbeddingDataset;

/// Per-dimension z-scoring fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation of every column. Constant
    /// columns get a standard deviation of 1 so the map stays invertible.
    pub fn fit(data: &EmbeddingDataset) -> Self {
        let (n, d) = data.features().dim();
        let mut mean = vec![0.0f64; d];
        for row in data.features().rows() {
            for (m, &x) in mean.iter_mut().zip(row) {
                *m += x as f64;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);

        let mut var = vec![0.0f64; d];
        for row in data.features().rows() {
            for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(row) {
                let c = x as f64 - m;
                *v += c * c;
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.std.len() {
            return Err(Error::LengthMismatch {
                what: "standardizer mean vs std",
                left: self.mean.len(),
                right: self.std.len(),
            });
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::OutOfRange("non-finite standardizer mean".into()));
        }
        if self.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::OutOfRange("standardizer std must be finite and > 0".into()));
        }
        Ok(())
    }
}

/// Writes the (optionally standardized) feature row into `out` as `f64`.
pub(crate) fn transform_row<'a>(
    standardizer: Option<&Standardizer>,
    row: impl IntoIterator<Item = &'a f32>,
    out: &mut [f64],
) {
    match standardizer {
        Some(s) => {
            for (((o, &x), m), sd) in out.iter_mut().zip(row).zip(&s.mean).zip(&s.std) {
                *o = (x as f64 - m) / sd;
            }
        }
        None => {
            for (o, &x) in out.iter_mut().zip(row) {
                *o = x as f64;
            }
        }
    }
}
