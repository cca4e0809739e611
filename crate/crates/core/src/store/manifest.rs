//! JSON manifests that bind sample ids and labels to rows of EMB1 files.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Component, Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dataset::{EmbeddingDataset, Label};
use super::emb1;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    /// Path of the EMB1 file, relative to the manifest's directory.
    pub embedding_file: String,
    pub row_index: u32,
    pub label: Label,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Parses and checks the structural invariants (non-empty, unique ids,
    /// relative paths). Row resolution is checked when loading.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let manifest: DatasetManifest = serde_json::from_slice(bytes)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self)?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Manifest("no entries".into()));
        }
        let mut ids = HashSet::with_capacity(self.entries.len());
        for entry in &self.entries {
            if !ids.insert(entry.id.as_str()) {
                return Err(Error::DuplicateId(entry.id.clone()));
            }
            let path = Path::new(&entry.embedding_file);
            let escapes = path
                .components()
                .any(|c| !matches!(c, Component::Normal(_) | Component::CurDir));
            if entry.embedding_file.is_empty() || escapes {
                return Err(Error::Manifest(format!(
                    "embedding_file {:?} must be a relative path inside the manifest directory",
                    entry.embedding_file
                )));
            }
        }
        Ok(())
    }

    /// Manifest describing `dataset` stored row-for-row in `embedding_file`.
    pub fn for_dataset(dataset: &EmbeddingDataset, embedding_file: &str) -> Self {
        let entries = dataset
            .ids()
            .iter()
            .zip(dataset.labels())
            .enumerate()
            .map(|(row, (id, &label))| ManifestEntry {
                id: id.clone(),
                embedding_file: embedding_file.to_string(),
                row_index: row as u32,
                label,
                source: dataset.source().to_string(),
            })
            .collect();
        Self { entries }
    }

    /// Resolves every entry against EMB1 files under `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<EmbeddingDataset> {
        self.resolve_with(base_dir, &mut HashMap::new())
    }

    fn resolve_with(
        &self,
        base_dir: &Path,
        cache: &mut HashMap<String, Array2<f32>>,
    ) -> Result<EmbeddingDataset> {
        self.validate()?;
        for entry in &self.entries {
            if !cache.contains_key(&entry.embedding_file) {
                let matrix = read_matrix(&base_dir.join(&entry.embedding_file))?;
                cache.insert(entry.embedding_file.clone(), matrix);
            }
        }

        let d = cache[&self.entries[0].embedding_file].ncols();
        let n = self.entries.len();
        let mut features = Array2::<f32>::zeros((n, d));
        for (i, entry) in self.entries.iter().enumerate() {
            let matrix = &cache[&entry.embedding_file];
            if matrix.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: matrix.ncols(),
                });
            }
            let row = entry.row_index as usize;
            if row >= matrix.nrows() {
                return Err(Error::Manifest(format!(
                    "entry {:?} points at row {} of {}, which has {} rows",
                    entry.id,
                    row,
                    entry.embedding_file,
                    matrix.nrows()
                )));
            }
            features.row_mut(i).assign(&matrix.row(row));
        }

        let mut sources: Vec<&str> = Vec::new();
        for entry in &self.entries {
            if !sources.contains(&entry.source.as_str()) {
                sources.push(&entry.source);
            }
        }
        EmbeddingDataset::new(
            self.entries.iter().map(|e| e.id.clone()).collect(),
            features,
            self.entries.iter().map(|e| e.label).collect(),
            sources.join("+"),
        )
    }
}

/// Sidecar manifest path used by [`write_embeddings`]: `<file>.manifest.json`.
pub fn sidecar_path(embedding_path: &Path) -> PathBuf {
    let mut name = embedding_path.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn read_matrix(path: &Path) -> Result<Array2<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    emb1::decode(&bytes)
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    DatasetManifest::from_json(&bytes)
}

/// Loads the dataset described by a manifest file.
pub fn load_manifest(path: &Path) -> Result<EmbeddingDataset> {
    read_manifest(path)?.resolve(parent_dir(path))
}

/// Writes `dataset` as an EMB1 file at `destination` plus a sidecar manifest
/// carrying ids, labels and source.
pub fn write_embeddings(dataset: &EmbeddingDataset, destination: &Path) -> Result<()> {
    let bytes = emb1::encode(dataset.features())?;
    let file_name = destination
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Manifest(format!("unusable destination {}", destination.display())))?;
    let manifest = DatasetManifest::for_dataset(dataset, file_name);
    fs::write(destination, bytes).map_err(|e| Error::io(destination, e))?;
    let sidecar = sidecar_path(destination);
    fs::write(&sidecar, manifest.to_json()?).map_err(|e| Error::io(&sidecar, e))
}

/// Reads an EMB1 file together with its sidecar manifest.
pub fn read_embeddings(source: &Path) -> Result<EmbeddingDataset> {
    let matrix = read_matrix(source)?;
    let manifest = read_manifest(&sidecar_path(source))?;
    let mut cache = HashMap::new();
    if let Some(name) = source.file_name().and_then(|n| n.to_str()) {
        cache.insert(name.to_string(), matrix);
    }
    manifest.resolve_with(parent_dir(source), &mut cache)
}

fn parent_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}
