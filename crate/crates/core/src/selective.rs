//! Entropy-based selective prediction: score each prediction's uncertainty,
//! then sweep a rejection threshold to trade coverage for accuracy.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accuracy, MetricsReport, ScoredSet, DEFAULT_BINS};
use crate::store::Label;

/// Binary entropy of `p` in bits, which is the entropy divided by its
/// maximum (attained at p = 0.5). Uses 0·log 0 = 0.
pub fn unit_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("probability {p} outside [0, 1]")));
    }
    let term = |q: f64| if q > 0.0 { q * q.log2() } else { 0.0 };
    // max(0) folds the -0.0 produced at the endpoints
    Ok((-(term(p) + term(1.0 - p))).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub y_hat: f64,
    pub unit_entropy: f64,
    pub hard_label: Label,
}

impl Prediction {
    pub fn new(id: impl Into<String>, y_hat: f64, decision_threshold: f64) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            y_hat,
            unit_entropy: unit_entropy(y_hat)?,
            hard_label: Label::from_spoof(y_hat >= decision_threshold),
        })
    }
}

pub fn predictions(ids: &[String], probs: &[f64], decision_threshold: f64) -> Result<Vec<Prediction>> {
    if ids.len() != probs.len() {
        return Err(Error::LengthMismatch {
            what: "ids vs probabilities",
            left: ids.len(),
            right: probs.len(),
        });
    }
    ids.iter()
        .zip(probs)
        .map(|(id, &p)| Prediction::new(id.clone(), p, decision_threshold))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub kept_fraction: f64,
    /// `None` when no sample is kept.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCurve {
    pub points: Vec<CurvePoint>,
}

pub const DEFAULT_STEP: f64 = 0.01;

/// For τ = 0, step, …, 1 keeps the samples with unit entropy ≤ τ and
/// reports the kept fraction and the accuracy on what was kept.
pub fn rejection_curve(
    predictions: &[Prediction],
    labels: &[Label],
    step: f64,
    decision_threshold: f64,
) -> Result<RejectionCurve> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs labels",
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    let steps = step_count(step)?;

    // Sort by entropy once; each τ keeps a prefix.
    let mut order: Vec<(f64, bool)> = predictions
        .iter()
        .zip(labels)
        .map(|(p, l)| (p.unit_entropy, (p.y_hat >= decision_threshold) == l.is_spoof()))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = predictions.len();
    let mut kept = 0;
    let mut correct = 0;
    let mut points = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        while kept < n && order[kept].0 <= tau {
            correct += order[kept].1 as usize;
            kept += 1;
        }
        points.push(CurvePoint {
            tau,
            kept_fraction: kept as f64 / n as f64,
            accuracy: (kept > 0).then(|| correct as f64 / kept as f64),
        });
    }
    Ok(RejectionCurve { points })
}

fn step_count(step: f64) -> Result<usize> {
    let bad = || Error::InvalidConfig(format!("step {step} must divide 1 evenly"));
    if !(step > 0.0 && step <= 1.0) {
        return Err(bad());
    }
    let count = (1.0 / step).round();
    if (count * step - 1.0).abs() > 1e-9 {
        return Err(bad());
    }
    Ok(count as usize)
}

impl RejectionCurve {
    /// Smallest τ whose kept fraction reaches `min_fraction`.
    pub fn first_with_coverage(&self, min_fraction: f64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.kept_fraction >= min_fraction)
    }

    /// CSV with header `tau,kept_fraction,accuracy`; accuracy is empty when
    /// undefined.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush().map_err(|e| Error::io("<rejection csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        if r.headers()? != vec!["tau", "kept_fraction", "accuracy"] {
            return Err(Error::InvalidDataset("unexpected rejection CSV header".into()));
        }
        let points = r
            .deserialize()
            .map(|row| row.map_err(Error::from))
            .collect::<Result<Vec<CurvePoint>>>()?;
        Ok(Self { points })
    }
}

/// Per-sample score record as emitted next to every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub y_hat: f64,
    pub unit_entropy: f64,
    pub label: Label,
}

/// CSV with header `id,y_hat,unit_entropy,label`.
pub fn write_scores_csv<W: Write>(predictions: &[Prediction], labels: &[Label], writer: W) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs labels",
            left: predictions.len(),
            right: labels.len(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    for (p, &label) in predictions.iter().zip(labels) {
        w.serialize(ScoreRow {
            id: p.id.clone(),
            y_hat: p.y_hat,
            unit_entropy: p.unit_entropy,
            label,
        })?;
    }
    w.flush().map_err(|e| Error::io("<scores csv>", e))?;
    Ok(())
}

/// Reads a scores CSV, checking the header and that each entropy matches
/// its probability.
pub fn read_scores_csv<R: Read>(reader: R) -> Result<Vec<ScoreRow>> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()? != vec!["id", "y_hat", "unit_entropy", "label"] {
        return Err(Error::InvalidDataset("unexpected scores CSV header".into()));
    }
    let rows = r
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect::<Result<Vec<ScoreRow>>>()?;
    for row in &rows {
        let h = unit_entropy(row.y_hat)?;
        if (h - row.unit_entropy).abs() > 1e-12 {
            return Err(Error::InvalidDataset(format!(
                "entropy {} does not match y_hat {} for {:?}",
                row.unit_entropy, row.y_hat, row.id
            )));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<Prediction>,
    pub report: MetricsReport,
    pub curve: RejectionCurve,
}

/// Metrics report and rejection curve at the default bins (15), step (0.01)
/// and decision threshold (0.5).
pub fn evaluate_all(ids: &[String], probs: &[f64], labels: &[Label]) -> Result<Evaluation> {
    evaluate_with(ids, probs, labels, DEFAULT_BINS, DEFAULT_STEP, 0.5)
}

pub fn evaluate_with(
    ids: &[String],
    probs: &[f64],
    labels: &[Label],
    n_bins: usize,
    step: f64,
    decision_threshold: f64,
) -> Result<Evaluation> {
    let predictions = predictions(ids, probs, decision_threshold)?;
    let set = ScoredSet::new(probs.to_vec(), labels.to_vec())?;
    let report = MetricsReport::compute(&set, n_bins, decision_threshold)?;
    let curve = rejection_curve(&predictions, labels, step, decision_threshold)?;
    debug_assert_eq!(
        curve.points.last().and_then(|p| p.accuracy),
        Some(accuracy(&set, decision_threshold))
    );
    Ok(Evaluation {
        predictions,
        report,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_spot_values() {
        assert_eq!(unit_entropy(0.5).unwrap(), 1.0);
        assert_eq!(unit_entropy(0.0).unwrap(), 0.0);
        assert_eq!(unit_entropy(1.0).unwrap(), 0.0);
        assert!(unit_entropy(1.0).unwrap().is_sign_positive());
        // -(0.9 log2 0.9 + 0.1 log2 0.1) = 0.468996
        assert!((unit_entropy(0.9).unwrap() - 0.46900).abs() < 1e-4);
        assert!(unit_entropy(-0.1).is_err());
        assert!(unit_entropy(1.5).is_err());
        assert!(unit_entropy(f64::NAN).is_err());
    }

    #[test]
    fn entropy_grid_shape() {
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        for &p in &grid {
            let h = unit_entropy(p).unwrap();
            assert!((h - unit_entropy(1.0 - p).unwrap()).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&h));
            assert_eq!(h == 0.0, p == 0.0 || p == 1.0, "p = {p}");
            assert_eq!(h == 1.0, p == 0.5, "p = {p}");
            // natural log divided by ln 2
            let nat = if p > 0.0 && p < 1.0 {
                -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / std::f64::consts::LN_2
            } else {
                0.0
            };
            assert!((h - nat).abs() < 1e-12);
        }
        // concavity: midpoint value dominates the chord
        for w in grid.windows(3) {
            let [a, b, c] = [w[0], w[1], w[2]].map(|p| unit_entropy(p).unwrap());
            assert!(b >= 0.5 * (a + c) - 1e-15);
        }
    }

    fn preds(ys: &[f64]) -> Vec<Prediction> {
        ys.iter()
            .enumerate()
            .map(|(i, &y)| Prediction::new(i.to_string(), y, 0.5).unwrap())
            .collect()
    }

    #[test]
    fn curve_has_101_points() {
        let c = rejection_curve(&preds(&[0.3]), &[Label::Bonafide], 0.01, 0.5).unwrap();
        assert_eq!(c.points.len(), 101);
        assert_eq!(c.points[0].tau, 0.0);
        assert_eq!(c.points[100].tau, 1.0);
        assert!(c.points.windows(2).all(|w| w[0].tau < w[1].tau));
        assert!((c.points[37].tau - 0.37).abs() < 1e-15);
    }

    #[test]
    fn nothing_rejected_with_zero_entropy() {
        let c = rejection_curve(&preds(&[0.0, 1.0]), &[Label::Bonafide, Label::Spoof], 0.01, 0.5).unwrap();
        assert!(c.points.iter().all(|p| p.kept_fraction == 1.0 && p.accuracy == Some(1.0)));
    }

    #[test]
    fn worked_example() {
        let p = preds(&[0.99, 0.8, 0.55]);
        for (pred, h) in p.iter().zip([0.0808, 0.7219, 0.9928]) {
            assert!((pred.unit_entropy - h).abs() < 1e-4);
        }
        let labels = [Label::Spoof, Label::Bonafide, Label::Spoof];
        let c = rejection_curve(&p, &labels, 0.01, 0.5).unwrap();
        let at_half = &c.points[50];
        assert_eq!(at_half.tau, 0.5);
        assert!((at_half.kept_fraction - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(at_half.accuracy, Some(1.0));
        assert_eq!(c.points[0].accuracy, None);
        let last = c.points.last().unwrap();
        assert_eq!(last.kept_fraction, 1.0);
        assert!((last.accuracy.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bad_step_and_lengths() {
        let p = preds(&[0.2]);
        assert!(rejection_curve(&p, &[Label::Spoof], 0.3, 0.5).is_err());
        assert!(rejection_curve(&p, &[Label::Spoof], 0.0, 0.5).is_err());
        assert!(rejection_curve(&p, &[], 0.01, 0.5).is_err());
        assert_eq!(rejection_curve(&p, &[Label::Spoof], 0.25, 0.5).unwrap().points.len(), 5);
    }

    #[test]
    fn csv_roundtrips() {
        let p = preds(&[0.99, 0.8, 0.55]);
        let labels = [Label::Spoof, Label::Bonafide, Label::Spoof];
        let c = rejection_curve(&p, &labels, 0.01, 0.5).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("tau,kept_fraction,accuracy\n0.0,0.0,\n"));
        assert_eq!(RejectionCurve::read_csv(&buf[..]).unwrap(), c);

        let mut buf = Vec::new();
        write_scores_csv(&p, &labels, &mut buf).unwrap();
        let rows = read_scores_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].label, Label::Bonafide);
        assert_eq!(rows[2].y_hat, 0.55);
    }

    #[test]
    fn evaluate_all_consistent() {
        let ids: Vec<String> = (0..6).map(|i| format!("u{i}")).collect();
        let probs = [0.1, 0.3, 0.45, 0.55, 0.8, 0.95];
        let labels = [0, 0, 1, 0, 1, 1].map(|b| Label::from_bit(b).unwrap());
        let ev = evaluate_all(&ids, &probs, &labels).unwrap();
        let set = ScoredSet::new(probs.to_vec(), labels.to_vec()).unwrap();
        assert_eq!(ev.report, MetricsReport::compute(&set, 15, 0.5).unwrap());
        assert_eq!(ev.curve.points.last().unwrap().accuracy, Some(ev.report.accuracy));
    }
}
