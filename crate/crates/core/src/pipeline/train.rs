use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{stream, Stream, SubisoViews, TrainConfig};
use super::PipelineError;
use crate::autodiff::{AdamConfig, AdamState, Tape, Tensor, Var};
use crate::expert::{iso_similarity, structural_matrix, InitialLabels, WlConfig};
use crate::gnn::{GraphBatch, Model};
use crate::graph::{DatasetBundle, Graph};
use crate::objective::{combine, mse_iso, mse_subiso, nt_xent, LossBreakdown};

/// One line of the metrics stream: epoch means of the per-batch losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub l_c: f64,
    pub l_iso: f64,
    pub l_subiso: f64,
    pub total: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: Model,
    pub metrics: Vec<MetricsRecord>,
    /// Optimizer steps taken over the whole run.
    pub steps: usize,
    /// Size-1 remainder batches that were dropped.
    pub skipped_batches: usize,
}

/// Expert targets for one batch, held outside any tape.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTargets {
    /// `N x 1` graph-tier similarities of the view pairs.
    pub y_iso: Tensor,
    /// Normalized structural matrix of each first view.
    pub subiso_i: Vec<Tensor>,
    /// Same for the second views; empty unless both views are used.
    pub subiso_j: Vec<Tensor>,
}

/// WL settings used for the graph-tier targets: one refinement round per
/// encoder layer.
pub fn wl_config(cfg: &TrainConfig, data: &DatasetBundle) -> WlConfig {
    let initial = cfg.initial_labels.unwrap_or(if data.has_node_labels {
        InitialLabels::NodeLabels
    } else {
        InitialLabels::Degree
    });
    WlConfig::new(cfg.layers).with_policy(cfg.label_set).with_initial(initial)
}

fn structural_targets(views: &[Graph], lambda: f64) -> Result<Vec<Tensor>, PipelineError> {
    views
        .par_iter()
        .map(|g| {
            let n = g.num_nodes();
            let s = structural_matrix(g, lambda)?;
            Ok(Tensor::new(n, n, s.dense())?)
        })
        .collect()
}

pub fn batch_targets(
    views_i: &[Graph],
    views_j: &[Graph],
    cfg: &TrainConfig,
    wl: &WlConfig,
) -> Result<BatchTargets, PipelineError> {
    if views_i.len() != views_j.len() {
        return Err(PipelineError::Data(format!("{} first views but {} second views", views_i.len(), views_j.len())));
    }
    let y: Vec<f64> = views_i
        .par_iter()
        .zip(views_j.par_iter())
        .map(|(gi, gj)| iso_similarity(gi, gj, wl).map(|s| s.value()))
        .collect::<Result<_, _>>()?;
    let subiso_i = structural_targets(views_i, cfg.lambda)?;
    let subiso_j = match cfg.subiso_views {
        SubisoViews::First => Vec::new(),
        SubisoViews::Both => structural_targets(views_j, cfg.lambda)?,
    };
    Ok(BatchTargets { y_iso: Tensor::new(y.len(), 1, y)?, subiso_i, subiso_j })
}

fn subiso_loss(
    model: &Model,
    tape: &mut Tape,
    h: Var,
    batch: &GraphBatch,
    targets: &[Tensor],
) -> Result<Var, PipelineError> {
    let mut preds = Vec::with_capacity(targets.len());
    let mut consts = Vec::with_capacity(targets.len());
    for (g, target) in targets.iter().enumerate() {
        let (start, end) = batch.node_range(g);
        let hg = tape.slice_rows(h, start, end)?;
        preds.push(model.predict_subiso(tape, hg)?);
        consts.push(tape.constant(target.clone()));
    }
    Ok(mse_subiso(tape, &consts, &preds)?)
}

/// Records the full objective for one batch of view pairs on `tape`.
pub fn batch_loss(
    model: &Model,
    tape: &mut Tape,
    views_i: &[Graph],
    views_j: &[Graph],
    targets: &BatchTargets,
    cfg: &TrainConfig,
) -> Result<(Var, LossBreakdown), PipelineError> {
    let refs_i: Vec<&Graph> = views_i.iter().collect();
    let refs_j: Vec<&Graph> = views_j.iter().collect();
    let batch_i = GraphBatch::new(&refs_i)?;
    let batch_j = GraphBatch::new(&refs_j)?;
    let enc_i = model.encode_batch(tape, &batch_i)?;
    let enc_j = model.encode_batch(tape, &batch_j)?;

    let p_i = model.project(tape, enc_i.z)?;
    let p_j = model.project(tape, enc_j.z)?;
    let l_c = nt_xent(tape, p_i, p_j, cfg.tau)?;

    let y_iso = tape.constant(targets.y_iso.clone());
    let y_hat = model.predict_iso(tape, enc_i.z, enc_j.z)?;
    let l_iso = mse_iso(tape, y_iso, y_hat)?;

    let mut l_subiso = subiso_loss(model, tape, enc_i.h, &batch_i, &targets.subiso_i)?;
    if !targets.subiso_j.is_empty() {
        let other = subiso_loss(model, tape, enc_j.h, &batch_j, &targets.subiso_j)?;
        let both = tape.add(l_subiso, other)?;
        l_subiso = tape.scalar_mul(both, 0.5);
    }
    Ok(combine(tape, l_c, l_iso, l_subiso, cfg.alpha, cfg.beta)?)
}

fn augment_pair<R: Rng + ?Sized>(
    graphs: &[&Graph],
    cfg: &TrainConfig,
    fill: &[f64],
    rng: &mut R,
) -> Result<(Vec<Graph>, Vec<Graph>), PipelineError> {
    let mut vi = Vec::with_capacity(graphs.len());
    let mut vj = Vec::with_capacity(graphs.len());
    for g in graphs {
        vi.push(cfg.augment_i.apply(g, fill, rng)?);
        vj.push(cfg.augment_j.apply(g, fill, rng)?);
    }
    Ok((vi, vj))
}

fn check_data(data: &DatasetBundle) -> Result<(), PipelineError> {
    if data.graphs.is_empty() {
        return Err(PipelineError::Data("dataset has no graphs".into()));
    }
    if let Some(i) = data.graphs.iter().position(|g| g.num_nodes() == 0) {
        return Err(PipelineError::Data(format!("graph {i} has no nodes")));
    }
    if let Some(i) = data.graphs.iter().position(|g| g.node_features().is_none()) {
        return Err(PipelineError::Data(format!("graph {i} has no node features")));
    }
    Ok(())
}

pub fn train(data: &DatasetBundle, cfg: &TrainConfig) -> Result<TrainOutput, PipelineError> {
    train_with(data, cfg, |_| {})
}

/// [`train`] with a callback invoked after every epoch.
pub fn train_with(
    data: &DatasetBundle,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&MetricsRecord),
) -> Result<TrainOutput, PipelineError> {
    cfg.validate()?;
    check_data(data)?;
    let mut model = Model::new(cfg.model_config(data.feature_dim()), &mut stream(cfg.seed, Stream::Init));
    let mut adam = AdamState::new(AdamConfig { lr: cfg.lr, ..AdamConfig::default() }, &model.store);
    let mut shuffle_rng = stream(cfg.seed, Stream::Shuffle);
    let mut augment_rng = stream(cfg.seed, Stream::Augment);
    let wl = wl_config(cfg, data);
    let fill = data.feature_mean();

    let mut order: Vec<usize> = (0..data.graphs.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;
    let mut skipped = 0;
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let mut sums = [0.0f64; 4];
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            if chunk.len() < 2 {
                log::warn!("epoch {epoch}: skipping batch {b} of size {}", chunk.len());
                skipped += 1;
                continue;
            }
            let graphs: Vec<&Graph> = chunk.iter().map(|&i| &data.graphs[i]).collect();
            let (views_i, views_j) = augment_pair(&graphs, cfg, &fill, &mut augment_rng)?;
            let targets = batch_targets(&views_i, &views_j, cfg, &wl)?;

            let mut tape = Tape::new();
            let (loss, parts) = batch_loss(&model, &mut tape, &views_i, &views_j, &targets, cfg)?;
            if ![parts.l_c, parts.l_iso, parts.l_subiso, parts.total].iter().all(|x| x.is_finite()) {
                return Err(PipelineError::NonFinite { epoch, batch: b, breakdown: parts });
            }
            let grads = tape.backward(loss)?;
            model.store.zero_grad();
            tape.accumulate(&grads, &mut model.store)?;
            adam.step(&mut model.store)?;
            steps += 1;

            sums[0] += parts.l_c;
            sums[1] += parts.l_iso;
            sums[2] += parts.l_subiso;
            sums[3] += parts.total;
            batches += 1;
        }
        if batches == 0 {
            return Err(PipelineError::Data("no batch with at least 2 graphs".into()));
        }
        let k = batches as f64;
        let record = MetricsRecord {
            epoch,
            l_c: sums[0] / k,
            l_iso: sums[1] / k,
            l_subiso: sums[2] / k,
            total: sums[3] / k,
            seconds: if cfg.wall_clock { start.elapsed().as_secs_f64() } else { 0.0 },
        };
        on_epoch(&record);
        metrics.push(record);
    }
    Ok(TrainOutput { model, metrics, steps, skipped_batches: skipped })
}

/// Embeds every graph without augmentation; row `i` belongs to `graphs[i]`.
pub fn embed_dataset(model: &Model, graphs: &[Graph]) -> Result<Tensor, PipelineError> {
    let mut data = Vec::with_capacity(graphs.len() * model.config.embedding);
    for chunk in graphs.chunks(64) {
        let refs: Vec<&Graph> = chunk.iter().collect();
        let batch = GraphBatch::new(&refs)?;
        let mut tape = Tape::new();
        let enc = model.encode_batch(&mut tape, &batch)?;
        data.extend_from_slice(tape.value(enc.z).data());
    }
    Ok(Tensor::new(graphs.len(), model.config.embedding, data)?)
}

/// Writes one JSON object per line.
pub fn write_metrics(path: impl AsRef<Path>, metrics: &[MetricsRecord]) -> Result<(), PipelineError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| PipelineError::Io(format!("{}: {e}", path.display()));
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for m in metrics {
        writeln!(out, "{}", serde_json::to_string(m).expect("metrics serialize")).map_err(io)?;
    }
    out.flush().map_err(io)
}
