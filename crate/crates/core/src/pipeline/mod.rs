//! Training loop, embedding extraction, linear-probe evaluation, the
//! coefficient sweep and the end-to-end gradient check.

mod config;
mod gradcheck;
mod probe;
mod sweep;
mod train;

use thiserror::Error;

pub use config::{
    stream, ExpertiseOptions, ProbeConfig, RunConfigFile, Stream, SubisoViews, SweepGrid, TrainConfig, SCHEMA_VERSION,
};
pub use gradcheck::{gradcheck, relative_error, GradcheckOptions, GradcheckReport, ParamCheck};
pub use probe::{linear_probe_cv, stratified_folds, LogisticRegression, ProbeResult};
pub use sweep::{sweep, train_and_probe, SweepCell, SweepResult};
pub use train::{
    batch_loss, batch_targets, embed_dataset, train, train_with, wl_config, write_metrics, BatchTargets,
    MetricsRecord, TrainOutput,
};

use crate::augment::AugmentError;
use crate::autodiff::TensorError;
use crate::expert::ExpertError;
use crate::gnn::GnnError;
use crate::graph::GraphError;
use crate::objective::{LossBreakdown, ObjectiveError};
use crate::tudataset::IngestError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("dataset: {0}")]
    Data(String),
    #[error("probe: {0}")]
    Probe(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}: {breakdown:?}")]
    NonFinite { epoch: usize, batch: usize, breakdown: LossBreakdown },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Expert(#[from] ExpertError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
