//! Two-layer perceptron (one ReLU hidden layer, sigmoid output) trained with
//! mini-batch SGD and classical momentum.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::standardize::{transform_row, Standardizer};
use super::{check_trainable, log1p_exp, sigmoid, TrainConfig};
use crate::error::{Error, Result};
use crate::store::EmbeddingDataset;

/// Weights of the network. `layer1_weights` is D×H, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpParams {
    pub input_dim: usize,
    pub hidden_size: usize,
    pub layer1_weights: Vec<f64>,
    pub layer1_bias: Vec<f64>,
    pub layer2_weights: Vec<f64>,
    pub layer2_bias: f64,
}

impl MlpParams {
    pub fn zeros(input_dim: usize, hidden_size: usize) -> Self {
        Self {
            input_dim,
            hidden_size,
            layer1_weights: vec![0.0; input_dim * hidden_size],
            layer1_bias: vec![0.0; hidden_size],
            layer2_weights: vec![0.0; hidden_size],
            layer2_bias: 0.0,
        }
    }

    /// He-normal first layer, N(0, 1/H) output layer, zero biases.
    pub fn init(input_dim: usize, hidden_size: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(input_dim, hidden_size);
        let l1 = Normal::new(0.0, (2.0 / input_dim as f64).sqrt()).unwrap();
        let l2 = Normal::new(0.0, (1.0 / hidden_size as f64).sqrt()).unwrap();
        p.layer1_weights.iter_mut().for_each(|w| *w = l1.sample(rng));
        p.layer2_weights.iter_mut().for_each(|w| *w = l2.sample(rng));
        p
    }

    pub fn num_params(&self) -> usize {
        self.layer1_weights.len() + self.layer1_bias.len() + self.layer2_weights.len() + 1
    }

    /// All parameters as one vector: layer1 weights, layer1 bias, layer2
    /// weights, layer2 bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(&self.layer1_weights);
        v.extend_from_slice(&self.layer1_bias);
        v.extend_from_slice(&self.layer2_weights);
        v.push(self.layer2_bias);
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params());
        let (a, rest) = flat.split_at(self.layer1_weights.len());
        let (b, rest) = rest.split_at(self.hidden_size);
        let (c, rest) = rest.split_at(self.hidden_size);
        self.layer1_weights.copy_from_slice(a);
        self.layer1_bias.copy_from_slice(b);
        self.layer2_weights.copy_from_slice(c);
        self.layer2_bias = rest[0];
    }

    fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 || self.input_dim == 0 {
            return Err(Error::InvalidConfig("MLP needs D >= 1 and H >= 1".into()));
        }
        let expect = [
            (self.layer1_weights.len(), self.input_dim * self.hidden_size),
            (self.layer1_bias.len(), self.hidden_size),
            (self.layer2_weights.len(), self.hidden_size),
        ];
        for (found, expected) in expect {
            if found != expected {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("non-finite MLP parameter".into()));
        }
        Ok(())
    }

    /// Output logit; fills `hidden` with post-ReLU activations.
    fn forward(&self, x: &[f64], hidden: &mut [f64]) -> f64 {
        hidden.copy_from_slice(&self.layer1_bias);
        for (xj, wrow) in x.iter().zip(self.layer1_weights.chunks_exact(self.hidden_size)) {
            for (h, w) in hidden.iter_mut().zip(wrow) {
                *h += xj * w;
            }
        }
        hidden.iter_mut().for_each(|h| *h = h.max(0.0));
        hidden
            .iter()
            .zip(&self.layer2_weights)
            .map(|(h, w)| h * w)
            .sum::<f64>()
            + self.layer2_bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpMeta {
    pub train_seed: u64,
    pub lambda: f64,
    pub epochs: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpModel {
    pub params: MlpParams,
    pub standardizer: Option<Standardizer>,
    pub meta: MlpMeta,
}

impl MlpModel {
    pub fn dim(&self) -> usize {
        self.params.input_dim
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if let Some(s) = &self.standardizer {
            s.validate()?;
            if s.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: s.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn predict_raw(&self, data: &EmbeddingDataset) -> Result<Vec<f64>> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        let mut x = vec![0.0; self.dim()];
        let mut hidden = vec![0.0; self.params.hidden_size];
        Ok(data
            .features()
            .rows()
            .into_iter()
            .map(|row| {
                transform_row(self.standardizer.as_ref(), row, &mut x);
                sigmoid(self.params.forward(&x, &mut hidden))
            })
            .collect())
    }
}

/// Mean cross-entropy over `rows` of `data` plus (λ/2)·(‖W1‖² + ‖w2‖²),
/// and its gradient laid out like [`MlpParams`].
pub fn objective(
    data: &EmbeddingDataset,
    standardizer: Option<&Standardizer>,
    params: &MlpParams,
    lambda: f64,
    rows: &[usize],
) -> (f64, MlpParams) {
    let h_size = params.hidden_size;
    let mut grad = MlpParams::zeros(params.input_dim, h_size);
    let mut x = vec![0.0; params.input_dim];
    let mut hidden = vec![0.0; h_size];
    let mut loss = 0.0;
    for &i in rows {
        transform_row(standardizer, data.row(i), &mut x);
        let z = params.forward(&x, &mut hidden);
        let y = if data.labels()[i].is_spoof() { 1.0 } else { 0.0 };
        loss += log1p_exp(z) - y * z;
        let dz = sigmoid(z) - y;
        grad.layer2_bias += dz;
        for (k, &hk) in hidden.iter().enumerate() {
            grad.layer2_weights[k] += dz * hk;
            if hk > 0.0 {
                let dh = dz * params.layer2_weights[k];
                grad.layer1_bias[k] += dh;
                for (j, xj) in x.iter().enumerate() {
                    grad.layer1_weights[j * h_size + k] += dh * xj;
                }
            }
        }
    }
    let n = rows.len() as f64;
    let sq = |v: &[f64]| v.iter().map(|w| w * w).sum::<f64>();
    let penalty = sq(&params.layer1_weights) + sq(&params.layer2_weights);
    for (g, w) in grad.layer1_weights.iter_mut().zip(&params.layer1_weights) {
        *g = *g / n + lambda * w;
    }
    for (g, w) in grad.layer2_weights.iter_mut().zip(&params.layer2_weights) {
        *g = *g / n + lambda * w;
    }
    grad.layer1_bias.iter_mut().for_each(|g| *g /= n);
    grad.layer2_bias /= n;
    (loss / n + 0.5 * lambda * penalty, grad)
}

pub fn train_mlp(train: &EmbeddingDataset, config: &TrainConfig) -> Result<MlpModel> {
    config.validate()?;
    check_trainable(train)?;
    let standardizer = config.standardize.then(|| Standardizer::fit(train));
    let std_ref = standardizer.as_ref();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = MlpParams::init(train.dim(), config.hidden_size, &mut rng);
    let mut velocity = vec![0.0; params.num_params()];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut iteration = 0;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            iteration += 1;
            let (loss, grad) = objective(train, std_ref, &params, config.lambda, batch);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { iteration });
            }
            let mut flat = params.to_flat();
            for ((p, v), g) in flat.iter_mut().zip(velocity.iter_mut()).zip(grad.to_flat()) {
                *v = config.momentum * *v - config.step_size * g;
                *p += *v;
            }
            params.set_flat(&flat);
        }
    }

    let all: Vec<usize> = (0..train.len()).collect();
    let (final_loss, _) = objective(train, std_ref, &params, config.lambda, &all);
    if !final_loss.is_finite() {
        return Err(Error::NonFiniteLoss { iteration });
    }
    Ok(MlpModel {
        params,
        standardizer,
        meta: MlpMeta {
            train_seed: config.seed,
            lambda: config.lambda,
            epochs: config.epochs,
            final_loss,
        },
    })
}
