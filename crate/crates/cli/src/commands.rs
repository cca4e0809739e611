use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spoofcal::classifier::{self, ensemble_predict, ClassifierKind, Model, TrainConfig};
use spoofcal::metrics::{ece, eer, write_bins_csv, MetricsReport, ScoredSet, DEFAULT_BINS};
use spoofcal::selective::{evaluate_all, write_scores_csv, Evaluation};
use spoofcal::store::{self, emb1, load_manifest, subsample, EmbeddingDataset};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};
use crate::output::{dataset_names, write_atomic, write_json};

pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const STUDY_FILE: &str = "study.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub classifier: ClassifierKind,
    pub n_train: usize,
    pub dim: usize,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn load(path: &Path) -> Result<EmbeddingDataset, CliError> {
    load_manifest(path).at(path)
}

fn train_report(model: &Model, data: &EmbeddingDataset, config: &TrainConfig) -> TrainReport {
    let (iterations, converged) = match model {
        Model::Logistic(m) => (m.meta.iterations, m.meta.converged),
        // SGD has no stopping test; it always runs the scheduled epochs.
        Model::Mlp(m) => (m.meta.epochs * data.len().div_ceil(config.batch_size), true),
    };
    TrainReport {
        classifier: model.kind(),
        n_train: data.len(),
        dim: data.dim(),
        final_loss: model.final_loss(),
        iterations,
        converged,
    }
}

/// Trains one model; writes `model.json` and `train_report.json`.
pub fn train(cfg: &ExperimentConfig) -> Result<TrainReport, CliError> {
    let out = cfg.require_output_dir()?;
    let manifest = cfg.require_train_manifest()?;
    cfg.train.validate()?;
    let data = load(manifest)?;
    let model = classifier::train(cfg.classifier, &data, &cfg.train).at(manifest)?;
    let report = train_report(&model, &data, &cfg.train);
    write_atomic(&out.join(MODEL_FILE), &model.to_json()?)?;
    write_json(&out.join(TRAIN_REPORT_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub source: String,
    pub n_models: usize,
    pub metrics: MetricsReport,
}

/// Per evaluation set, writes `<name>.metrics.json`, `<name>.scores.csv`,
/// `<name>.rejection.csv` and `<name>.bins.csv`. With several models the
/// scores are the mean of the members' probabilities.
pub fn evaluate(model_paths: &[PathBuf], cfg: &ExperimentConfig) -> Result<Vec<DatasetReport>, CliError> {
    if model_paths.is_empty() {
        return Err(CliError::Usage("at least one model is required (--model)".into()));
    }
    let out = cfg.require_output_dir()?;
    let manifests = cfg.require_eval_manifests()?;
    let models = model_paths
        .iter()
        .map(|p| Model::load(p).at(p))
        .collect::<Result<Vec<_>, _>>()?;
    let dim = models[0].dim();
    if let Some((p, m)) = model_paths.iter().zip(&models).find(|(_, m)| m.dim() != dim) {
        return Err(spoofcal::Error::DimensionMismatch {
            expected: dim,
            found: m.dim(),
        })
        .at(p);
    }

    let names = dataset_names(manifests);
    let mut reports = Vec::with_capacity(manifests.len());
    for (manifest, name) in manifests.iter().zip(names) {
        let data = load(manifest)?;
        let probs = ensemble_predict(&models, &data).at(manifest)?;
        let ev = evaluate_all(data.ids(), &probs, data.labels()).at(manifest)?;
        write_evaluation(out, &name, &data, &ev)?;
        let report = DatasetReport {
            dataset: name.clone(),
            source: data.source().to_string(),
            n_models: models.len(),
            metrics: ev.report,
        };
        write_json(&out.join(format!("{name}.metrics.json")), &report)?;
        reports.push(report);
    }
    Ok(reports)
}

fn write_evaluation(out: &Path, name: &str, data: &EmbeddingDataset, ev: &Evaluation) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_scores_csv(&ev.predictions, data.labels(), &mut buf)?;
    write_atomic(&out.join(format!("{name}.scores.csv")), &buf)?;
    buf.clear();
    ev.curve.write_csv(&mut buf)?;
    write_atomic(&out.join(format!("{name}.rejection.csv")), &buf)?;
    buf.clear();
    write_bins_csv(&ev.report.bins, &mut buf)?;
    write_atomic(&out.join(format!("{name}.bins.csv")), &buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Replicate,
    Aggregate,
}

/// One line of `study.csv`. Replicate rows carry a seed and per-run
/// metrics; aggregate rows carry the mean in `eer`/`ece` and the population
/// standard deviation over seeds in `eer_std`/`ece_std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub kind: RowKind,
    pub eval_set: String,
    pub size: usize,
    pub seed: Option<u64>,
    pub eer: f64,
    pub ece: f64,
    pub eer_std: Option<f64>,
    pub ece_std: Option<f64>,
}

/// Trains one model per (size, seed) on a stratified subsample and scores it
/// on every evaluation set. Writes `study.csv`.
pub fn study(cfg: &ExperimentConfig) -> Result<Vec<StudyRow>, CliError> {
    let out = cfg.require_output_dir()?;
    let manifest = cfg.require_train_manifest()?;
    let manifests = cfg.require_eval_manifests()?;
    let seeds = cfg.require_seeds()?;
    let sizes = cfg
        .subsample_sizes
        .as_deref()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::Usage("subsample sizes are required (--sizes)".into()))?;
    cfg.train.validate()?;

    let train = load(manifest)?;
    for &size in sizes {
        store::stratified_counts(train.count_bonafide(), train.count_spoof(), size).at(manifest)?;
    }
    let names = dataset_names(manifests);
    let evals = manifests.iter().map(|m| load(m)).collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&size| seeds.iter().map(move |&seed| (size, seed)))
        .collect();
    // (eer, ece) per eval set, in job order regardless of scheduling
    let results = jobs
        .par_iter()
        .map(|&(size, seed)| run_replicate(&train, &evals, cfg.classifier, &cfg.train, size, seed).at(manifest))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (e, name) in names.iter().enumerate() {
        for (&(size, seed), metrics) in jobs.iter().zip(&results) {
            rows.push(StudyRow {
                kind: RowKind::Replicate,
                eval_set: name.clone(),
                size,
                seed: Some(seed),
                eer: metrics[e].0,
                ece: metrics[e].1,
                eer_std: None,
                ece_std: None,
            });
        }
    }
    let mut aggregates = Vec::new();
    for name in &names {
        for &size in sizes {
            let group: Vec<&StudyRow> = rows.iter().filter(|r| &r.eval_set == name && r.size == size).collect();
            let (eer_mean, eer_std) = mean_std(group.iter().map(|r| r.eer));
            let (ece_mean, ece_std) = mean_std(group.iter().map(|r| r.ece));
            aggregates.push(StudyRow {
                kind: RowKind::Aggregate,
                eval_set: name.clone(),
                size,
                seed: None,
                eer: eer_mean,
                ece: ece_mean,
                eer_std: Some(eer_std),
                ece_std: Some(ece_std),
            });
        }
    }
    rows.extend(aggregates);

    let mut buf = Vec::new();
    write_study_csv(&rows, &mut buf)?;
    write_atomic(&out.join(STUDY_FILE), &buf)?;
    Ok(rows)
}

fn run_replicate(
    train: &EmbeddingDataset,
    evals: &[EmbeddingDataset],
    kind: ClassifierKind,
    config: &TrainConfig,
    size: usize,
    seed: u64,
) -> spoofcal::Result<Vec<(f64, f64)>> {
    let subset = subsample(train, size, seed)?;
    let config = TrainConfig {
        seed,
        ..config.clone()
    };
    let model = classifier::train(kind, &subset, &config)?;
    evals
        .iter()
        .map(|data| {
            let set = ScoredSet::new(model.predict_proba(data)?, data.labels().to_vec())?;
            Ok((eer(&set)?.0, ece(&set, DEFAULT_BINS)?.0))
        })
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn write_study_csv<W: std::io::Write>(rows: &[StudyRow], writer: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(spoofcal::Error::from)?;
    }
    w.flush().map_err(|source| CliError::Output {
        path: STUDY_FILE.into(),
        source,
    })
}

pub fn read_study_csv<R: std::io::Read>(reader: R) -> Result<Vec<StudyRow>, CliError> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = ["kind", "eval_set", "size", "seed", "eer", "ece", "eer_std", "ece_std"];
    if r.headers().map_err(spoofcal::Error::from)? != expected.as_slice() {
        return Err(spoofcal::Error::InvalidDataset("unexpected study CSV header".into()).into());
    }
    r.deserialize()
        .map(|row| row.map_err(|e| spoofcal::Error::from(e).into()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub file: String,
    pub n: usize,
    pub d: usize,
    pub dtype: String,
    /// Whether a sidecar manifest was found and resolved against the file.
    pub manifest: bool,
}

/// Validates EMB1 files (and their sidecar manifests when present).
pub fn extract_check(files: &[PathBuf]) -> Result<Vec<CheckReport>, CliError> {
    if files.is_empty() {
        return Err(CliError::Usage("no files given".into()));
    }
    files
        .iter()
        .map(|file| {
            let bytes = fs::read(file)
                .map_err(|e| spoofcal::Error::Io {
                    path: file.clone(),
                    source: e,
                })
                .at(file)?;
            let matrix = emb1::decode(&bytes).at(file)?;
            let sidecar = store::sidecar_path(file);
            let manifest = sidecar.exists();
            if manifest {
                store::read_embeddings(file).at(&sidecar)?;
            }
            Ok(CheckReport {
                file: file.display().to_string(),
                n: matrix.nrows(),
                d: matrix.ncols(),
                dtype: "f32".into(),
                manifest,
            })
        })
        .collect()
}
