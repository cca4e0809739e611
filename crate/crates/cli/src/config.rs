use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use spoofcal::classifier::{ClassifierKind, TrainConfig};

use crate::error::CliError;

/// Everything an experiment needs. Can be loaded from a JSON file; command
/// line flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub train_manifest: Option<PathBuf>,
    pub eval_manifests: Vec<PathBuf>,
    pub classifier: ClassifierKind,
    #[serde(flatten)]
    pub train: TrainConfig,
    pub subsample_sizes: Option<Vec<usize>>,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train_manifest: None,
            eval_manifests: Vec::new(),
            classifier: ClassifierKind::Logistic,
            train: TrainConfig::default(),
            subsample_sizes: None,
            seeds: vec![0, 1, 2],
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(bytes: &[u8]) -> Result<Self, CliError> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("config: {e}"));
        let value: serde_json::Value = serde_json::from_slice(bytes).map_err(bad)?;
        // serde ignores unknown keys around a flattened struct; check by hand
        let known = serde_json::to_value(Self::default()).expect("config serializes");
        if let (Some(given), Some(known)) = (value.as_object(), known.as_object()) {
            if let Some(key) = given.keys().find(|k| !known.contains_key(*k)) {
                return Err(CliError::Usage(format!("config: unknown field {key:?}")));
            }
        }
        serde_json::from_value(value).map_err(bad)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }

    pub fn require_train_manifest(&self) -> Result<&Path, CliError> {
        self.train_manifest
            .as_deref()
            .ok_or_else(|| CliError::Usage("a training manifest is required (--train-manifest)".into()))
    }

    pub fn require_eval_manifests(&self) -> Result<&[PathBuf], CliError> {
        if self.eval_manifests.is_empty() {
            return Err(CliError::Usage("at least one evaluation manifest is required (--eval-manifest)".into()));
        }
        Ok(&self.eval_manifests)
    }

    pub fn require_output_dir(&self) -> Result<&Path, CliError> {
        self.output_dir
            .as_deref()
            .ok_or_else(|| CliError::Usage("an output directory is required (--output-dir)".into()))
    }

    pub fn require_seeds(&self) -> Result<&[u64], CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("seed list must not be empty".into()));
        }
        Ok(&self.seeds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Logistic,
    Mlp,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Logistic => ClassifierKind::Logistic,
            ClassifierArg::Mlp => ClassifierKind::Mlp,
        }
    }
}

/// Flags shared by commands that read an experiment configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration; flags given here override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for all outputs (created if missing).
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    /// Evaluation manifest; repeat for several datasets.
    #[arg(long = "eval-manifest")]
    pub eval_manifests: Vec<PathBuf>,
}

/// Training flags.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Training manifest (JSON).
    #[arg(long)]
    pub train_manifest: Option<PathBuf>,
    /// Back-end to train.
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierArg>,
    /// L2 coefficient [default: 1e-4].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Stop when the gradient infinity-norm is at most this [default: 1e-7].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap for logistic regression [default: 10000].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Train on raw features instead of per-dimension z-scores.
    #[arg(long)]
    pub no_standardize: bool,
    /// MLP hidden width. Implementation default, not from the method [default: 256].
    #[arg(long)]
    pub hidden_size: Option<usize>,
    /// MLP SGD step size. Implementation default [default: 0.01].
    #[arg(long)]
    pub step_size: Option<f64>,
    /// MLP momentum. Implementation default [default: 0.9].
    #[arg(long)]
    pub momentum: Option<f64>,
    /// MLP mini-batch size. Implementation default [default: 64].
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// MLP epochs. Implementation default [default: 30].
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl TrainArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(p) = &self.train_manifest {
            cfg.train_manifest = Some(p.clone());
        }
        if let Some(c) = self.classifier {
            cfg.classifier = c.into();
        }
        let t = &mut cfg.train;
        if let Some(v) = self.lambda {
            t.lambda = v;
        }
        if let Some(v) = self.tol {
            t.tol = v;
        }
        if let Some(v) = self.max_iters {
            t.max_iters = v;
        }
        if self.no_standardize {
            t.standardize = false;
        }
        if let Some(v) = self.hidden_size {
            t.hidden_size = v;
        }
        if let Some(v) = self.step_size {
            t.step_size = v;
        }
        if let Some(v) = self.momentum {
            t.momentum = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = self.epochs {
            t.epochs = v;
        }
    }
}

impl ExperimentArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &self.output_dir {
            cfg.output_dir = Some(d.clone());
        }
        if !self.eval_manifests.is_empty() {
            cfg.eval_manifests = self.eval_manifests.clone();
        }
        Ok(cfg)
    }
}
