//! Minimal dense tensors with reverse-mode differentiation and Adam.

mod adam;
mod checkpoint;
mod params;
mod tape;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, Record, MAGIC as CHECKPOINT_MAGIC};
pub use params::{ParamId, ParamStore, Parameter};
pub use tape::{sigmoid, Gradients, OpKind, Tape, Var};
pub use tensor::Tensor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    Shape { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("shape {shape:?} needs {} values, got {len}", .shape.0 * .shape.1)]
    DataLength { shape: (usize, usize), len: usize },
    #[error("expected a scalar, got shape {0:?}")]
    NotScalar((usize, usize)),
    #[error("{0}: no input")]
    Empty(&'static str),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
