use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spoofcal::classifier::Model;
use spoofcal::metrics::{read_bins_csv, MetricsReport, ScoredSet};
use spoofcal::selective::{read_scores_csv, RejectionCurve};
use spoofcal::store::{sidecar_path, write_embeddings, EmbeddingDataset, Label};
use spoofcal::synthetic::GaussianClasses;
use spoofcal_cli::commands::{read_study_csv, DatasetReport, RowKind, TrainReport};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spoofcal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a dataset and returns its manifest path.
fn fixture(dir: &Path, name: &str, ds: &EmbeddingDataset) -> PathBuf {
    let emb = dir.join(format!("{name}.emb1"));
    write_embeddings(ds, &emb).unwrap();
    sidecar_path(&emb)
}

fn gaussian(n: usize, seed: u64, prefix: &str, dim: usize, separation: f64) -> EmbeddingDataset {
    GaussianClasses {
        dim,
        separation,
        spoof_fraction: 0.5,
    }
    .sample(n, seed, prefix)
    .unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn train_converges_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "train", &gaussian(400, 0, "t", 8, 1.5));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["train", "--train-manifest", s(&m), "-o", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let report: TrainReport = serde_json::from_slice(&fs::read(a.join("train_report.json")).unwrap()).unwrap();
    assert!(report.converged);
    assert!(report.final_loss.is_finite());
    assert_eq!(fs::read(a.join("model.json")).unwrap(), fs::read(b.join("model.json")).unwrap());
    assert_eq!(
        fs::read(a.join("train_report.json")).unwrap(),
        fs::read(b.join("train_report.json")).unwrap()
    );
    Model::load(&a.join("model.json")).unwrap();
}

#[test]
fn single_class_manifest_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let ds = gaussian(20, 0, "t", 3, 1.0);
    let (ids, f, _, src) = ds.into_parts();
    let only_spoof = EmbeddingDataset::new(ids, f, vec![Label::Spoof; 20], src).unwrap();
    let m = fixture(dir.path(), "spoof", &only_spoof);
    let o = run(&["train", "--train-manifest", s(&m), "-o", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "data");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // missing required --model
    assert_eq!(run(&["eval", "-o", s(dir.path())]).status.code(), Some(2));
    // model present but no evaluation manifests
    let m = fixture(dir.path(), "train", &gaussian(40, 0, "t", 2, 2.0));
    assert!(run(&["train", "--train-manifest", s(&m), "-o", s(dir.path())]).status.success());
    let o = run(&["eval", "--model", s(&dir.path().join("model.json")), "-o", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");
    // invalid hyperparameter
    let o = run(&["train", "--train-manifest", s(&m), "-o", s(dir.path()), "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_fans_out_and_reports_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(300, 0, "t", 6, 1.0));
    let ind = fixture(dir.path(), "in_domain", &gaussian(200, 1, "i", 6, 1.0));
    let ood = fixture(dir.path(), "wild", &gaussian(200, 2, "w", 6, 0.4));
    let out = dir.path().join("out");
    assert!(run(&["train", "--train-manifest", s(&train), "-o", s(&out)]).status.success());
    let o = run(&[
        "eval",
        "--model",
        s(&out.join("model.json")),
        "--eval-manifest",
        s(&ind),
        "--eval-manifest",
        s(&ood),
        "-o",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("EER") && stdout.contains('%'));

    for name in ["in_domain.emb1", "wild.emb1"] {
        let report: DatasetReport =
            serde_json::from_slice(&fs::read(out.join(format!("{name}.metrics.json"))).unwrap()).unwrap();
        let rows = read_scores_csv(fs::File::open(out.join(format!("{name}.scores.csv"))).unwrap()).unwrap();
        let set = ScoredSet::new(rows.iter().map(|r| r.y_hat).collect(), rows.iter().map(|r| r.label).collect())
            .unwrap();
        let recomputed = MetricsReport::compute(&set, 15, 0.5).unwrap();
        assert_eq!(recomputed, report.metrics);
        assert!(report.metrics.eer <= 1.0 && report.metrics.ece <= 1.0);

        let curve = RejectionCurve::read_csv(fs::File::open(out.join(format!("{name}.rejection.csv"))).unwrap()).unwrap();
        assert_eq!(curve.points.len(), 101);
        assert_eq!(curve.points[100].accuracy, Some(report.metrics.accuracy));
        let bins = read_bins_csv(fs::File::open(out.join(format!("{name}.bins.csv"))).unwrap()).unwrap();
        assert_eq!(bins, report.metrics.bins);
    }
}

#[test]
fn eval_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(50, 0, "t", 4, 2.0));
    let other = fixture(dir.path(), "other", &gaussian(50, 0, "o", 5, 2.0));
    assert!(run(&["train", "--train-manifest", s(&train), "-o", s(dir.path())]).status.success());
    let o = run(&[
        "eval",
        "--model",
        s(&dir.path().join("model.json")),
        "--eval-manifest",
        s(&other),
        "-o",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn ensemble_matches_eval_and_member_mean() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(300, 0, "t", 4, 1.0));
    let test = fixture(dir.path(), "test", &gaussian(100, 1, "x", 4, 1.0));
    let mut models = Vec::new();
    for seed in 0..3u64 {
        let out = dir.path().join(format!("m{seed}"));
        let o = run(&[
            "train",
            "--train-manifest",
            s(&train),
            "--classifier",
            "mlp",
            "--hidden-size",
            "8",
            "--epochs",
            "5",
            "--seed",
            &seed.to_string(),
            "-o",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let e = run(&["eval", "--model", s(&out.join("model.json")), "--eval-manifest", s(&test), "-o", s(&out)]);
        assert!(e.status.success());
        models.push(out);
    }

    // one-member ensemble == eval
    let single = dir.path().join("single");
    let o = run(&[
        "ensemble",
        "--model",
        s(&models[0].join("model.json")),
        "--eval-manifest",
        s(&test),
        "-o",
        s(&single),
    ]);
    assert!(o.status.success());
    for suffix in ["scores.csv", "rejection.csv", "bins.csv"] {
        assert_eq!(
            fs::read(single.join(format!("test.emb1.{suffix}"))).unwrap(),
            fs::read(models[0].join(format!("test.emb1.{suffix}"))).unwrap()
        );
    }

    let ens = dir.path().join("ens");
    let mut args = vec!["ensemble".to_string()];
    for m in &models {
        args.extend(["--model".into(), s(&m.join("model.json")).into()]);
    }
    args.extend(["--eval-manifest".into(), s(&test).into(), "-o".into(), s(&ens).into()]);
    assert!(bin().args(&args).output().unwrap().status.success());
    let report: DatasetReport = serde_json::from_slice(&fs::read(ens.join("test.emb1.metrics.json")).unwrap()).unwrap();
    assert_eq!(report.n_models, 3);

    let read = |d: &Path| read_scores_csv(fs::File::open(d.join("test.emb1.scores.csv")).unwrap()).unwrap();
    let members: Vec<_> = models.iter().map(|m| read(m)).collect();
    for (i, row) in read(&ens).iter().enumerate() {
        let mean = members.iter().map(|m| m[i].y_hat).sum::<f64>() / 3.0;
        assert!((row.y_hat - mean).abs() < 1e-15, "{} vs {}", row.y_hat, mean);
        assert_eq!(row.id, members[0][i].id);
    }
}

#[test]
fn study_full_size_replicates_agree() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(120, 0, "t", 3, 1.0));
    let test = fixture(dir.path(), "test", &gaussian(80, 1, "x", 3, 1.0));
    let o = run(&[
        "study",
        "--train-manifest",
        s(&train),
        "--eval-manifest",
        s(&test),
        "--sizes",
        "120",
        "-o",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_study_csv(fs::File::open(dir.path().join("study.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    let reps: Vec<_> = rows.iter().filter(|r| r.kind == RowKind::Replicate).collect();
    assert!(reps.windows(2).all(|w| w[0].eer == w[1].eer && w[0].ece == w[1].ece));
    assert!(rows[3].eer_std.unwrap() < 1e-15);
}

#[test]
fn study_three_sizes_two_sets_has_18_plus_6_rows() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(50_000, 0, "t", 2, 1.0));
    let test = fixture(dir.path(), "test", &gaussian(500, 1, "x", 2, 1.0));
    let config = dir.path().join("exp.json");
    fs::write(
        &config,
        serde_json::json!({
            "train_manifest": train,
            "eval_manifests": [test],
            "subsample_sizes": [2000, 4000, 8000, 16000, 32000, 50000],
            "output_dir": dir.path().join("out"),
        })
        .to_string(),
    )
    .unwrap();
    let o = run(&["study", "--config", s(&config)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_study_csv(fs::File::open(dir.path().join("out/study.csv")).unwrap()).unwrap();
    let reps: Vec<_> = rows.iter().filter(|r| r.kind == RowKind::Replicate).collect();
    let aggs: Vec<_> = rows.iter().filter(|r| r.kind == RowKind::Aggregate).collect();
    assert_eq!((reps.len(), aggs.len()), (18, 6));

    // recompute mean and population std from the replicate rows
    for agg in aggs {
        let vals: Vec<f64> = reps.iter().filter(|r| r.size == agg.size).map(|r| r.eer).collect();
        assert_eq!(vals.len(), 3);
        let mean = (vals[0] + vals[1] + vals[2]) / 3.0;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((agg.eer - mean).abs() < 1e-15);
        assert!((agg.eer_std.unwrap() - var.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn study_size_too_large() {
    let dir = tempfile::tempdir().unwrap();
    let train = fixture(dir.path(), "train", &gaussian(30, 0, "t", 2, 1.0));
    let o = run(&[
        "study",
        "--train-manifest",
        s(&train),
        "--eval-manifest",
        s(&train),
        "--sizes",
        "10,31",
        "-o",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("study.csv").exists());
}

#[test]
fn extract_check_validates_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), "ok", &gaussian(10, 0, "t", 7, 1.0));
    let emb = dir.path().join("ok.emb1");
    let o = run(&["extract-check", s(&emb)]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["n"].as_u64(), v["d"].as_u64(), v["manifest"].as_bool()), (Some(10), Some(7), Some(true)));

    let bad = dir.path().join("bad.emb1");
    let mut bytes = fs::read(&emb).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&bad, bytes).unwrap();
    let o = run(&["extract-check", s(&bad)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("truncated"));
    drop(m);
}
