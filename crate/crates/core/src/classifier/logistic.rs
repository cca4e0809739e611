//! L2-regularized logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::standardize::{transform_row, Standardizer};
use super::{check_trainable, log1p_exp, sigmoid, TrainConfig};
use crate::error::{Error, Result};
use crate::store::EmbeddingDataset;

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
/// Line search gives up once the trial step is this small.
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMeta {
    pub train_seed: u64,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Option<Standardizer>,
    pub meta: LinearMeta,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidDataset("model has no weights".into()));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::OutOfRange("non-finite model parameter".into()));
        }
        if let Some(s) = &self.standardizer {
            s.validate()?;
            if s.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: s.dim(),
                });
            }
        }
        if self.meta.lambda.is_nan() || self.meta.lambda < 0.0 {
            return Err(Error::OutOfRange("lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// Raw decision scores `wᵀx + b` after standardization.
    pub fn scores(&self, data: &EmbeddingDataset) -> Result<Vec<f64>> {
        if data.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: data.dim(),
            });
        }
        let mut buf = vec![0.0; self.dim()];
        Ok(data
            .features()
            .rows()
            .into_iter()
            .map(|row| {
                transform_row(self.standardizer.as_ref(), row, &mut buf);
                dot(&self.weights, &buf) + self.bias
            })
            .collect())
    }

    pub fn predict_raw(&self, data: &EmbeddingDataset) -> Result<Vec<f64>> {
        Ok(self.scores(data)?.into_iter().map(sigmoid).collect())
    }
}

/// Value and gradient of mean cross-entropy + (λ/2)‖w‖².
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub loss: f64,
    pub grad_weights: Vec<f64>,
    pub grad_bias: f64,
}

impl Objective {
    pub fn grad_inf_norm(&self) -> f64 {
        self.grad_weights
            .iter()
            .fold(self.grad_bias.abs(), |acc, g| acc.max(g.abs()))
    }
}

/// Objective on `data` with features mapped through `standardizer`.
pub fn objective(
    data: &EmbeddingDataset,
    standardizer: Option<&Standardizer>,
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> Objective {
    let d = weights.len();
    let n = data.len() as f64;
    let mut grad = vec![0.0; d];
    let mut grad_bias = 0.0;
    let mut loss = 0.0;
    let mut x = vec![0.0; d];
    for (row, label) in data.features().rows().into_iter().zip(data.labels()) {
        transform_row(standardizer, row, &mut x);
        let z = dot(weights, &x) + bias;
        let y = if label.is_spoof() { 1.0 } else { 0.0 };
        // -[y log σ(z) + (1-y) log(1-σ(z))] = log(1+e^z) - y z
        loss += log1p_exp(z) - y * z;
        let residual = sigmoid(z) - y;
        grad_bias += residual;
        for (g, xi) in grad.iter_mut().zip(&x) {
            *g += residual * xi;
        }
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum();
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + lambda * w;
    }
    Objective {
        loss: loss / n + 0.5 * lambda * penalty,
        grad_weights: grad,
        grad_bias: grad_bias / n,
    }
}

/// Gradient descent from the origin. Each step starts from a
/// Barzilai–Borwein trial length and halves it until the Armijo condition
/// holds, so the loss decreases monotonically.
pub fn train_logistic(train: &EmbeddingDataset, config: &TrainConfig) -> Result<LinearModel> {
    config.validate()?;
    check_trainable(train)?;
    let standardizer = config.standardize.then(|| Standardizer::fit(train));
    let std_ref = standardizer.as_ref();
    let lambda = config.lambda;
    let d = train.dim();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut current = objective(train, std_ref, &w, b, lambda);
    if !current.loss.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut trial_step = 1.0;
    let mut iterations = 0;
    let mut converged = current.grad_inf_norm() <= config.tol;

    while !converged && iterations < config.max_iters {
        iterations += 1;
        let g_sq: f64 = current.grad_weights.iter().map(|g| g * g).sum::<f64>()
            + current.grad_bias * current.grad_bias;

        let mut step = trial_step;
        let (next_w, next_b, next) = loop {
            let cand_w: Vec<f64> = w
                .iter()
                .zip(&current.grad_weights)
                .map(|(wi, gi)| wi - step * gi)
                .collect();
            let cand_b = b - step * current.grad_bias;
            let cand = objective(train, std_ref, &cand_w, cand_b, lambda);
            if !cand.loss.is_finite() {
                return Err(Error::NonFiniteLoss { iteration: iterations });
            }
            if cand.loss <= current.loss - ARMIJO_C * step * g_sq {
                break (cand_w, cand_b, cand);
            }
            step *= 0.5;
            if step < MIN_STEP {
                // no representable decrease left along the gradient
                return Ok(finish(w, b, current, standardizer, config, false, iterations));
            }
        };

        // BB1 length s·s / s·y for the next trial, with s = -step·g.
        let mut s_dot_y = -step * (next.grad_bias - current.grad_bias) * current.grad_bias;
        for (gn, gc) in next.grad_weights.iter().zip(&current.grad_weights) {
            s_dot_y -= step * (gn - gc) * gc;
        }
        let s_dot_s = step * step * g_sq;
        trial_step = if s_dot_y > 0.0 {
            s_dot_s / s_dot_y
        } else {
            step * 2.0
        };

        w = next_w;
        b = next_b;
        current = next;
        converged = current.grad_inf_norm() <= config.tol;
    }
    Ok(finish(w, b, current, standardizer, config, converged, iterations))
}

fn finish(
    weights: Vec<f64>,
    bias: f64,
    at: Objective,
    standardizer: Option<Standardizer>,
    config: &TrainConfig,
    converged: bool,
    iterations: usize,
) -> LinearModel {
    LinearModel {
        weights,
        bias,
        standardizer,
        meta: LinearMeta {
            train_seed: config.seed,
            lambda: config.lambda,
            converged,
            iterations,
            final_loss: at.loss,
        },
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
