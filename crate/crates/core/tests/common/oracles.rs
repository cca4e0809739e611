//! Brute-force reference implementations. Deliberately naive and free of any
//! call into the code under test.

#![allow(dead_code)]

/// EER by evaluating every threshold that produces a distinct decision set:
/// below the minimum, every midpoint between consecutive distinct scores,
/// and above the maximum. Same selection rule: minimal |FPR − FNR|, then
/// minimal (FPR + FNR)/2.
pub fn eer_midpoints(scores: &[f64], spoof: &[bool]) -> f64 {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut thresholds = vec![distinct[0] - 1.0];
    for w in distinct.windows(2) {
        thresholds.push(0.5 * (w[0] + w[1]));
    }
    thresholds.push(distinct[distinct.len() - 1] + 1.0);

    let positives = spoof.iter().filter(|s| **s).count() as f64;
    let negatives = spoof.len() as f64 - positives;
    let mut best: Option<(f64, f64)> = None;
    for t in thresholds {
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        for (s, &is_spoof) in scores.iter().zip(spoof) {
            let called_spoof = *s >= t;
            if called_spoof && !is_spoof {
                fp += 1.0;
            }
            if !called_spoof && is_spoof {
                fn_ += 1.0;
            }
        }
        let (fpr, fnr) = (fp / negatives, fn_ / positives);
        let cand = ((fpr - fnr).abs(), (fpr + fnr) / 2.0);
        best = match best {
            None => Some(cand),
            Some(b) if cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1) => Some(cand),
            keep => keep,
        };
    }
    best.unwrap().1
}

/// ECE with each sample placed by scanning the bins for the one whose
/// `[lo, hi)` (last bin `[lo, 1]`) contains it.
pub fn ece_explicit(scores: &[f64], spoof: &[bool], n_bins: usize) -> f64 {
    let mut sum = vec![0.0f64; n_bins];
    let mut count = vec![0usize; n_bins];
    let mut pos = vec![0usize; n_bins];
    for (&s, &y) in scores.iter().zip(spoof) {
        let mut placed = false;
        for k in 0..n_bins {
            let lo = k as f64 / n_bins as f64;
            let hi = (k + 1) as f64 / n_bins as f64;
            let inside = if k == n_bins - 1 { lo <= s && s <= hi } else { lo <= s && s < hi };
            if inside {
                sum[k] += s;
                count[k] += 1;
                if y {
                    pos[k] += 1;
                }
                placed = true;
                break;
            }
        }
        assert!(placed, "score {s} fell outside every bin");
    }
    let n = scores.len() as f64;
    let mut ece = 0.0;
    for k in 0..n_bins {
        if count[k] == 0 {
            continue;
        }
        let c = count[k] as f64;
        ece += (c / n) * (sum[k] / c - pos[k] as f64 / c).abs();
    }
    ece
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest componentwise |a − b| / max(|a|, |b|, floor).
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
        .fold(0.0, f64::max)
}
