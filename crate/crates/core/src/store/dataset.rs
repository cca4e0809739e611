use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ground-truth class of an utterance. Spoof is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bonafide,
    Spoof,
}

impl Label {
    pub fn is_spoof(self) -> bool {
        self == Label::Spoof
    }

    /// 0 for bonafide, 1 for spoof.
    pub fn as_bit(self) -> u8 {
        self as u8
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(Label::Bonafide),
            1 => Ok(Label::Spoof),
            other => Err(Error::OutOfRange(format!("label {other} is not 0 or 1"))),
        }
    }

    pub fn from_spoof(spoof: bool) -> Self {
        if spoof {
            Label::Spoof
        } else {
            Label::Bonafide
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Bonafide => "bonafide",
            Label::Spoof => "spoof",
        }
    }
}

/// Utterance-level embeddings with labels and sample ids.
///
/// Always holds at least one row, a non-zero embedding width and only finite
/// values. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    ids: Vec<String>,
    features: Array2<f32>,
    labels: Vec<Label>,
    source: String,
}

impl EmbeddingDataset {
    pub fn new(
        ids: Vec<String>,
        features: Array2<f32>,
        labels: Vec<Label>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 {
            return Err(Error::InvalidDataset("no rows".into()));
        }
        if d == 0 {
            return Err(Error::InvalidDataset("zero-width embeddings".into()));
        }
        if ids.len() != n {
            return Err(Error::LengthMismatch {
                what: "ids vs feature rows",
                left: ids.len(),
                right: n,
            });
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                what: "labels vs feature rows",
                left: labels.len(),
                right: n,
            });
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self {
            ids,
            features,
            labels,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn features(&self) -> &Array2<f32> {
        &self.features
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f32> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn count_spoof(&self) -> usize {
        self.labels.iter().filter(|l| l.is_spoof()).count()
    }

    pub fn count_bonafide(&self) -> usize {
        self.len() - self.count_spoof()
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyInput("row selection"));
        }
        Self::new(
            indices.iter().map(|&i| self.ids[i].clone()).collect(),
            self.features.select(Axis(0), indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.source.clone(),
        )
    }

    pub fn into_parts(self) -> (Vec<String>, Array2<f32>, Vec<Label>, String) {
        (self.ids, self.features, self.labels, self.source)
    }
}

/// Concatenates datasets in order. An id that collides with one already taken
/// is renamed to `"{source}/{id}"`; if that is also taken the merge fails.
pub fn merge(datasets: &[EmbeddingDataset]) -> Result<EmbeddingDataset> {
    let first = datasets.first().ok_or(Error::EmptyInput("dataset list"))?;
    if datasets.len() == 1 {
        return Ok(first.clone());
    }
    let d = first.dim();
    if let Some(bad) = datasets.iter().find(|ds| ds.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }

    let total: usize = datasets.iter().map(EmbeddingDataset::len).sum();
    let mut seen = HashSet::with_capacity(total);
    let mut ids = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    for ds in datasets {
        for (id, &label) in ds.ids.iter().zip(&ds.labels) {
            let id = if seen.contains(id) {
                let renamed = format!("{}/{}", ds.source, id);
                if seen.contains(&renamed) {
                    return Err(Error::DuplicateId(id.clone()));
                }
                renamed
            } else {
                id.clone()
            };
            seen.insert(id.clone());
            ids.push(id);
            labels.push(label);
        }
    }
    let views: Vec<_> = datasets.iter().map(|ds| ds.features.view()).collect();
    let features = ndarray::concatenate(Axis(0), &views).expect("widths checked above");

    let mut sources: Vec<&str> = Vec::new();
    for ds in datasets {
        if !sources.contains(&ds.source.as_str()) {
            sources.push(&ds.source);
        }
    }
    EmbeddingDataset::new(ids, features, labels, sources.join("+"))
}

/// Per-class sample counts for a stratified draw of `n` rows out of
/// `bonafide + spoof`, using largest-remainder rounding. A class that is
/// present keeps at least one row whenever `n >= 2`.
pub fn stratified_counts(bonafide: usize, spoof: usize, n: usize) -> Result<(usize, usize)> {
    let total = bonafide + spoof;
    if n == 0 || n > total {
        return Err(Error::SubsampleSize {
            requested: n,
            available: total,
        });
    }
    // Integer arithmetic so the split is exact and platform independent.
    let spoof_floor = spoof * n / total;
    let spoof_rem = spoof * n % total;
    let bona_rem = bonafide * n % total;
    let mut n_spoof = spoof_floor;
    let mut n_bona = n - spoof_floor;
    if n_bona > bonafide || (spoof_rem > 0 && spoof_rem > bona_rem) {
        // bonafide got the leftover unit but spoof has the larger remainder
        n_spoof += 1;
        n_bona -= 1;
    }
    if bonafide > 0 && spoof > 0 {
        if n_spoof == 0 {
            n_spoof = 1;
            n_bona -= 1;
        } else if n_bona == 0 {
            n_bona = 1;
            n_spoof -= 1;
        }
        if n_spoof == 0 || n_bona == 0 {
            return Err(Error::SubsampleClassStarved { requested: n });
        }
    }
    debug_assert!(n_spoof <= spoof && n_bona <= bonafide);
    Ok((n_bona, n_spoof))
}

/// Draws `n` rows without replacement, stratified by label. The result keeps
/// the original row order and depends only on `(dataset, n, seed)`.
pub fn subsample(dataset: &EmbeddingDataset, n: usize, seed: u64) -> Result<EmbeddingDataset> {
    let (bona_idx, spoof_idx): (Vec<usize>, Vec<usize>) =
        (0..dataset.len()).partition(|&i| !dataset.labels[i].is_spoof());
    let (n_bona, n_spoof) = stratified_counts(bona_idx.len(), spoof_idx.len(), n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(n);
    for (pool, take) in [(&bona_idx, n_bona), (&spoof_idx, n_spoof)] {
        chosen.extend(index::sample(&mut rng, pool.len(), take).into_iter().map(|k| pool[k]));
    }
    chosen.sort_unstable();
    dataset.select(&chosen)
}
