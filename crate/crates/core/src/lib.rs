//! Calibrated spoof/bonafide classification on frozen speech embeddings.
//!
//! The pipeline: load utterance-level embeddings ([`store`]), fit a
//! back-end that outputs P(spoof) ([`classifier`]), score it with equal
//! error rate and expected calibration error ([`metrics`]), and abstain on
//! high-entropy predictions ([`selective`]).

pub mod classifier;
pub mod error;
pub mod metrics;
pub mod selective;
pub mod store;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};
