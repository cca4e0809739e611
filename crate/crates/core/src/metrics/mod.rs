//! Evaluation measures: equal error rate, expected calibration error,
//! accuracy, and reliability-diagram bins.

mod ece;
mod eer;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use ece::{bin_index, ece, ece_from_bins, edge, finish_bin, Bin, DEFAULT_BINS};
pub use eer::eer;

use crate::error::{Error, Result};
use crate::store::Label;

/// Scores in `[0, 1]` (P(spoof)) aligned with ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<Label>,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<Label>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "scores vs labels",
                left: scores.len(),
                right: labels.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::EmptyInput("scored set"));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::OutOfRange(format!("score {s} outside [0, 1]")));
        }
        Ok(Self { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn count_spoof(&self) -> usize {
        self.labels.iter().filter(|l| l.is_spoof()).count()
    }
}

/// Fraction of samples whose decision (spoof iff score ≥ threshold) matches
/// the label.
pub fn accuracy(set: &ScoredSet, decision_threshold: f64) -> f64 {
    let correct = set
        .scores
        .iter()
        .zip(&set.labels)
        .filter(|(s, l)| (**s >= decision_threshold) == l.is_spoof())
        .count();
    correct as f64 / set.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub eer: f64,
    /// May be ±∞; serialized as the strings `"-inf"` / `"inf"` in that case.
    #[serde(with = "threshold_serde")]
    pub eer_threshold: f64,
    pub ece: f64,
    pub accuracy: f64,
    pub decision_threshold: f64,
    pub bins: Vec<Bin>,
}

impl MetricsReport {
    pub fn compute(set: &ScoredSet, n_bins: usize, decision_threshold: f64) -> Result<Self> {
        let (eer, eer_threshold) = eer(set)?;
        let (ece, bins) = ece(set, n_bins)?;
        Ok(Self {
            n: set.len(),
            eer,
            eer_threshold,
            ece,
            accuracy: accuracy(set, decision_threshold),
            decision_threshold,
            bins,
        })
    }

    /// Human-readable one-liner with percentages.
    pub fn summary(&self) -> String {
        format!(
            "EER {:.2}%  ECE {:.2}%  accuracy {:.2}%  (n = {})",
            100.0 * self.eer,
            100.0 * self.ece,
            100.0 * self.accuracy,
            self.n
        )
    }
}

/// Writes bins as CSV with header `lo,hi,count,mean_pred,frac_spoof`.
pub fn write_bins_csv<W: Write>(bins: &[Bin], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for bin in bins {
        w.serialize(bin)?;
    }
    w.flush().map_err(|e| Error::io("<bins csv>", e))?;
    Ok(())
}

pub fn read_bins_csv<R: Read>(reader: R) -> Result<Vec<Bin>> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()? != vec!["lo", "hi", "count", "mean_pred", "frac_spoof"] {
        return Err(Error::InvalidDataset("unexpected bins CSV header".into()));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

mod threshold_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *t == f64::INFINITY {
            s.serialize_str("inf")
        } else if *t == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*t)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("bad threshold {t:?}"))),
        }
    }
}
