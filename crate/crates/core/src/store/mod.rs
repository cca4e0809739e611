//! Embedding exchange format, manifests, and dataset manipulation.

mod dataset;
pub mod emb1;
mod manifest;

pub use dataset::{merge, stratified_counts, subsample, EmbeddingDataset, Label};
pub use manifest::{
    load_manifest, read_embeddings, read_manifest, read_matrix, sidecar_path, write_embeddings,
    DatasetManifest, ManifestEntry,
};
