use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ProbeConfig, SweepGrid, TrainConfig};
use super::probe::{linear_probe_cv, ProbeResult};
use super::train::{embed_dataset, train};
use super::PipelineError;
use crate::graph::DatasetBundle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ProbeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Alpha-major: cell `a * beta.len() + b` holds `(alpha[a], beta[b])`.
    pub cells: Vec<SweepCell>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl SweepResult {
    pub fn get(&self, a: usize, b: usize) -> &SweepCell {
        &self.cells[a * self.beta.len() + b]
    }
}

/// Train and probe one configuration.
pub fn train_and_probe(data: &DatasetBundle, cfg: &TrainConfig, probe: &ProbeConfig) -> Result<ProbeResult, PipelineError> {
    let out = train(data, cfg)?;
    let emb = embed_dataset(&out.model, &data.graphs)?;
    linear_probe_cv(&emb, &data.labels(), probe, cfg.seed)
}

/// One train+probe run per `(alpha, beta)` pair. Cell `k` uses seed
/// `base.seed + k`; a failing cell records its error and the rest continue.
pub fn sweep(
    data: &DatasetBundle,
    base: &TrainConfig,
    probe: &ProbeConfig,
    grid: &SweepGrid,
) -> Result<SweepResult, PipelineError> {
    if grid.alpha.is_empty() || grid.beta.is_empty() {
        return Err(PipelineError::Config("sweep grids must be nonempty".into()));
    }
    let pairs: Vec<(f64, f64)> =
        grid.alpha.iter().flat_map(|&a| grid.beta.iter().map(move |&b| (a, b))).collect();
    let cells = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(alpha, beta))| {
            let cfg = TrainConfig { alpha, beta, seed: base.seed.wrapping_add(k as u64), ..base.clone() };
            let outcome = cfg.validate().and_then(|_| train_and_probe(data, &cfg, probe));
            let (result, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => {
                    log::warn!("sweep cell alpha={alpha} beta={beta} failed: {e}");
                    (None, Some(e.to_string()))
                }
            };
            SweepCell { alpha, beta, seed: cfg.seed, result, error }
        })
        .collect();
    Ok(SweepResult { cells, alpha: grid.alpha.clone(), beta: grid.beta.clone() })
}
