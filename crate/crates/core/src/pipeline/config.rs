//! Run configuration and its TOML file form.
//!
//! ```toml
//! schema_version = 1
//! dataset = "crates/core/data/MUTAG"
//! out = "runs/mutag"
//!
//! [train]
//! alpha = 10.0
//! beta = 1000.0
//! epochs = 50
//! augment_i = { kind = "node_drop", ratio = 0.2 }
//! augment_j = { kind = "node_drop", ratio = 0.2 }
//!
//! [probe]
//! folds = 10
//! repeats = 5
//!
//! [sweep]
//! alpha = [1.0, 10.0, 100.0, 1000.0, 10000.0]
//! beta = [1.0, 10.0, 100.0, 1000.0, 10000.0]
//! ```
//!
//! Every table and key is optional except `schema_version`; unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::augment::AugmentSpec;
use crate::expert::{InitialLabels, LabelSetPolicy};
use crate::gnn::{ModelConfig, Pooling};

pub const SCHEMA_VERSION: u32 = 1;

/// Which views the subgraph-tier target is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubisoViews {
    /// First view only.
    #[default]
    First,
    /// Average of the losses on both views.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub layers: usize,
    pub hidden: usize,
    pub embedding: usize,
    pub subiso_width: usize,
    pub subiso_outer_width: usize,
    pub pooling: Pooling,
    pub augment_i: AugmentSpec,
    pub augment_j: AugmentSpec,
    pub label_set: LabelSetPolicy,
    /// Round-0 WL labels; unset means node labels when the dataset has them,
    /// degrees otherwise.
    pub initial_labels: Option<InitialLabels>,
    pub subiso_views: SubisoViews,
    pub seed: u64,
    /// Write measured seconds into the metrics stream; when false the field
    /// is written as 0 so reruns are byte-identical.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            beta: 1000.0,
            tau: 0.5,
            lambda: 1.0,
            lr: 1e-3,
            epochs: 50,
            batch_size: 32,
            layers: 3,
            hidden: 32,
            embedding: 32,
            subiso_width: 16,
            subiso_outer_width: 8,
            pooling: Pooling::Sum,
            augment_i: AugmentSpec::default(),
            augment_j: AugmentSpec::default(),
            label_set: LabelSetPolicy::FinalIteration,
            initial_labels: None,
            subiso_views: SubisoViews::First,
            seed: 0,
            wall_clock: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: String| Err(PipelineError::Config(msg));
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return fail(format!("alpha and beta must be non-negative (alpha={}, beta={})", self.alpha, self.beta));
        }
        if !(self.tau > 0.0) {
            return fail(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.lr > 0.0) {
            return fail(format!("lr must be positive, got {}", self.lr));
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size < 2 {
            return fail(format!("batch_size must be at least 2, got {}", self.batch_size));
        }
        if self.layers == 0 || self.hidden == 0 || self.embedding == 0 || self.subiso_width == 0 || self.subiso_outer_width == 0 {
            return fail("layer count and widths must be positive".into());
        }
        self.augment_i.check().map_err(|e| PipelineError::Config(format!("augment_i: {e}")))?;
        self.augment_j.check().map_err(|e| PipelineError::Config(format!("augment_j: {e}")))?;
        Ok(())
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            input_dim,
            layers: self.layers,
            hidden: self.hidden,
            embedding: self.embedding,
            subiso_width: self.subiso_width,
            subiso_outer_width: self.subiso_outer_width,
            pooling: self.pooling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub folds: usize,
    pub repeats: usize,
    /// L2 penalty on the classifier weights.
    pub l2: f64,
    /// Gradient-descent iterations per fold.
    pub iterations: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { folds: 10, repeats: 5, l2: 1e-2, iterations: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        let grid = vec![1.0, 10.0, 100.0, 1000.0, 10000.0];
        Self { alpha: grid.clone(), beta: grid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpertiseOptions {
    /// Graph index pairs for iso mode; empty means every graph with itself
    /// and with its successor.
    pub pairs: Vec<(usize, usize)>,
    pub iterations: usize,
    pub lambda: f64,
}

impl Default for ExpertiseOptions {
    fn default() -> Self {
        Self { pairs: Vec::new(), iterations: 3, lambda: 1.0 }
    }
}

/// Everything a command needs, as read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub expertise: ExpertiseOptions,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dataset: None,
            out: None,
            train: TrainConfig::default(),
            probe: ProbeConfig::default(),
            sweep: SweepGrid::default(),
            expertise: ExpertiseOptions::default(),
        }
    }
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let cfg: RunConfigFile = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(PipelineError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Shuffle = 2,
    Augment = 3,
    Probe = 4,
    Gradcheck = 5,
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
