use serde::{Deserialize, Serialize};

use super::ScoredSet;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 15;

/// One reliability-diagram bin over predicted P(spoof).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean predicted probability in the bin; 0 when empty.
    pub mean_pred: f64,
    /// Fraction of spoof samples in the bin; 0 when empty.
    pub frac_spoof: f64,
}

/// Lower edge of bin `k`; the upper edge of bin `k` is `edge(k + 1)`.
pub fn edge(k: usize, n_bins: usize) -> f64 {
    k as f64 / n_bins as f64
}

/// Bin holding `score`: `[k/n, (k+1)/n)`, with the last bin closed at 1.
pub fn bin_index(score: f64, n_bins: usize) -> usize {
    let mut k = ((score * n_bins as f64) as usize).min(n_bins - 1);
    // The product can round across an edge; settle against the stored edges.
    while k > 0 && score < edge(k, n_bins) {
        k -= 1;
    }
    while k + 1 < n_bins && score >= edge(k + 1, n_bins) {
        k += 1;
    }
    k
}

/// Summation shared with callers that assign bins some other way, so the
/// arithmetic (and therefore the result) is identical.
pub fn ece_from_bins(bins: &[Bin], total: usize) -> f64 {
    bins.iter()
        .filter(|b| b.count > 0)
        .map(|b| (b.count as f64 / total as f64) * (b.mean_pred - b.frac_spoof).abs())
        .sum()
}

/// Expected calibration error over `n_bins` equal-width bins of P(spoof).
pub fn ece(set: &ScoredSet, n_bins: usize) -> Result<(f64, Vec<Bin>)> {
    if n_bins < 1 {
        return Err(Error::InvalidConfig("n_bins must be >= 1".into()));
    }
    let mut sums = vec![0.0f64; n_bins];
    let mut counts = vec![0usize; n_bins];
    let mut spoofs = vec![0usize; n_bins];
    for (&s, label) in set.scores().iter().zip(set.labels()) {
        let k = bin_index(s, n_bins);
        sums[k] += s;
        counts[k] += 1;
        spoofs[k] += label.is_spoof() as usize;
    }
    let bins: Vec<Bin> = (0..n_bins)
        .map(|k| finish_bin(k, n_bins, counts[k], sums[k], spoofs[k]))
        .collect();
    Ok((ece_from_bins(&bins, set.len()), bins))
}

pub fn finish_bin(k: usize, n_bins: usize, count: usize, sum: f64, spoofs: usize) -> Bin {
    let (mean_pred, frac_spoof) = if count == 0 {
        (0.0, 0.0)
    } else {
        (sum / count as f64, spoofs as f64 / count as f64)
    };
    Bin {
        lo: edge(k, n_bins),
        hi: edge(k + 1, n_bins),
        count,
        mean_pred,
        frac_spoof,
    }
}
