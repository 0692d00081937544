//! Graph convolutional classifier over pooled knowledge-base graphs.
//!
//! Each layer computes `relu(Â·H·W + b)` with `Â = D^-1/2 (A+I) D^-1/2`; the
//! last layer's node states are mean-pooled per graph and fed to a linear
//! classifier trained with softmax cross-entropy.

mod adam;
mod adjacency;
mod checkpoint;
mod model;
pub mod synthetic;
mod train;

use thiserror::Error;

pub use adam::AdamState;
pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use checkpoint::Checkpoint;
pub use model::{argmax_rows, Dense, ForwardCache, GcnConfig, GcnModel, GcnParams};
pub use train::{evaluate, train, EpochRecord, Metrics, TrainingLog};

#[derive(Debug, Error)]
pub enum GcnError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("edge {edge:?} references a node outside 0..{nodes}")]
    IndexOutOfRange { edge: (usize, usize), nodes: usize },
    #[error("batch has no labels")]
    MissingLabels,
    #[error("label {label} is outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
