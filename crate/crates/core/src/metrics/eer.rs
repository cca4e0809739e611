use std::cmp::Ordering;

use super::ScoredSet;
use crate::error::{Error, Result};

/// Equal error rate and the threshold it was read at.
///
/// Candidate thresholds are −∞, every distinct score, and +∞, with the
/// decision "spoof iff score ≥ t". The chosen threshold minimizes
/// |FPR − FNR|; ties go to the smaller (FPR + FNR)/2, then the smaller
/// threshold. The returned rate is (FPR + FNR)/2 at that threshold.
pub fn eer(set: &ScoredSet) -> Result<(f64, f64)> {
    let n_spoof = set.count_spoof();
    let n_bona = set.len() - n_spoof;
    if n_spoof == 0 || n_bona == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| set.scores()[a].total_cmp(&set.scores()[b]));

    // At t = −∞ everything is called spoof.
    let mut bona_below = 0usize;
    let mut spoof_below = 0usize;
    let rates = |bona_below: usize, spoof_below: usize| {
        let fpr = (n_bona - bona_below) as f64 / n_bona as f64;
        let fnr = spoof_below as f64 / n_spoof as f64;
        (fpr, fnr)
    };
    let mut best = Candidate::new(f64::NEG_INFINITY, rates(0, 0));

    let mut i = 0;
    while i < order.len() {
        let threshold = set.scores()[order[i]];
        // Samples strictly below `threshold` are exactly the ones counted so far.
        best = best.pick(Candidate::new(threshold, rates(bona_below, spoof_below)));
        while i < order.len() && set.scores()[order[i]] == threshold {
            if set.labels()[order[i]].is_spoof() {
                spoof_below += 1;
            } else {
                bona_below += 1;
            }
            i += 1;
        }
    }
    best = best.pick(Candidate::new(f64::INFINITY, rates(bona_below, spoof_below)));
    Ok((best.rate, best.threshold))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    threshold: f64,
    gap: f64,
    rate: f64,
}

impl Candidate {
    fn new(threshold: f64, (fpr, fnr): (f64, f64)) -> Self {
        Self {
            threshold,
            gap: (fpr - fnr).abs(),
            rate: (fpr + fnr) / 2.0,
        }
    }

    /// Candidates arrive in increasing threshold order, so keeping the
    /// incumbent on a full tie prefers the smaller threshold.
    fn pick(self, other: Candidate) -> Candidate {
        match other
            .gap
            .total_cmp(&self.gap)
            .then(other.rate.total_cmp(&self.rate))
        {
            Ordering::Less => other,
            _ => self,
        }
    }
}
