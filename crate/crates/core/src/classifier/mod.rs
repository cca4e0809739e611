//! Back-ends that map embeddings to P(spoof): logistic regression and a
//! two-layer MLP, plus probability-averaging ensembles.

pub mod logistic;
pub mod mlp;
mod standardize;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use logistic::{train_logistic, LinearMeta, LinearModel};
pub use mlp::{train_mlp, MlpMeta, MlpModel, MlpParams};
pub use standardize::Standardizer;

use crate::error::{Error, Result};
use crate::store::EmbeddingDataset;

/// Predicted probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    #[default]
    Logistic,
    Mlp,
}

/// Training hyperparameters. The MLP fields (`hidden_size`, `step_size`,
/// `momentum`, `batch_size`, `epochs`) are ignored by logistic regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub standardize: bool,
    pub seed: u64,
    pub hidden_size: usize,
    pub step_size: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            tol: 1e-7,
            max_iters: 10_000,
            standardize: true,
            seed: 0,
            hidden_size: 256,
            step_size: 0.01,
            momentum: 0.9,
            batch_size: 64,
            epochs: 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and >= 0");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be > 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be >= 1");
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be >= 1");
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step_size must be > 0");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        Ok(())
    }
}

/// A trained back-end, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Logistic(LinearModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Logistic(m) => m.dim(),
            Model::Mlp(m) => m.dim(),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Logistic(_) => ClassifierKind::Logistic,
            Model::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    pub fn final_loss(&self) -> f64 {
        match self {
            Model::Logistic(m) => m.meta.final_loss,
            Model::Mlp(m) => m.meta.final_loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Logistic(m) => m.validate(),
            Model::Mlp(m) => m.validate(),
        }
    }

    /// P(spoof) per sample, clamped away from 0 and 1.
    pub fn predict_proba(&self, data: &EmbeddingDataset) -> Result<Vec<f64>> {
        let raw = match self {
            Model::Logistic(m) => m.predict_raw(data)?,
            Model::Mlp(m) => m.predict_raw(data)?,
        };
        Ok(raw.into_iter().map(clamp_prob).collect())
    }

    /// JSON with shortest round-trip float formatting.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let model: Model = serde_json::from_slice(bytes)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&bytes)
    }
}

pub fn train(kind: ClassifierKind, data: &EmbeddingDataset, config: &TrainConfig) -> Result<Model> {
    Ok(match kind {
        ClassifierKind::Logistic => Model::Logistic(train_logistic(data, config)?),
        ClassifierKind::Mlp => Model::Mlp(train_mlp(data, config)?),
    })
}

pub fn predict_proba(model: &Model, data: &EmbeddingDataset) -> Result<Vec<f64>> {
    model.predict_proba(data)
}

/// Arithmetic mean of the members' probabilities.
pub fn ensemble_predict(models: &[Model], data: &EmbeddingDataset) -> Result<Vec<f64>> {
    let (first, rest) = models.split_first().ok_or(Error::EmptyInput("model list"))?;
    let mut sum = first.predict_proba(data)?;
    for model in rest {
        for (s, p) in sum.iter_mut().zip(model.predict_proba(data)?) {
            *s += p;
        }
    }
    let k = models.len() as f64;
    Ok(sum.into_iter().map(|s| clamp_prob(s / k)).collect())
}

pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn log1p_exp(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn check_trainable(data: &EmbeddingDataset) -> Result<()> {
    let spoof = data.count_spoof();
    if spoof == 0 || spoof == data.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}
