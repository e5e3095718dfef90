//! Compares every parameter gradient of the full training objective against
//! central finite differences on a two-graph micro-batch.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{stream, Stream, TrainConfig};
use super::train::{batch_loss, batch_targets, wl_config, BatchTargets};
use super::PipelineError;
use crate::autodiff::{OpKind, Tape};
use crate::gnn::Model;
use crate::graph::{DatasetBundle, Graph};

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckOptions {
    pub step: f64,
    pub tolerance: f64,
    /// Lower bound on the denominator of the relative error.
    pub floor: f64,
    /// Dataset indices of the two graphs in the micro-batch.
    pub graphs: (usize, usize),
    /// Corrupts one backward rule; negative control only.
    pub fault: Option<OpKind>,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self { step: 1e-5, tolerance: 1e-4, floor: 1e-3, graphs: (0, 1), fault: None }
    }
}

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCheck {
    pub name: String,
    pub scalars: usize,
    pub max_rel_err: f64,
    pub max_abs_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub loss: f64,
    pub alpha: f64,
    pub beta: f64,
    pub step: f64,
    pub tolerance: f64,
    pub max_rel_err: f64,
    /// Parameter name and flat index of the worst entry.
    pub worst: (String, usize),
    pub scalars: usize,
    /// Entries whose two-sided difference crossed a ReLU kink and were
    /// measured one-sided instead.
    pub one_sided: usize,
    pub params: Vec<ParamCheck>,
    pub seconds: f64,
    pub passed: bool,
}

struct Probe<'a> {
    views_i: &'a [Graph],
    views_j: &'a [Graph],
    targets: &'a BatchTargets,
    cfg: &'a TrainConfig,
}

impl Probe<'_> {
    fn eval(&self, model: &Model) -> Result<(f64, Vec<bool>), PipelineError> {
        let mut tape = Tape::new();
        let (loss, _) = batch_loss(model, &mut tape, self.views_i, self.views_j, self.targets, self.cfg)?;
        Ok((tape.value(loss).item()?, tape.relu_pattern()))
    }
}

pub fn gradcheck(
    data: &DatasetBundle,
    cfg: &TrainConfig,
    opts: &GradcheckOptions,
) -> Result<GradcheckReport, PipelineError> {
    let start = Instant::now();
    cfg.validate()?;
    let (a, b) = opts.graphs;
    if a == b || a >= data.graphs.len() || b >= data.graphs.len() {
        return Err(PipelineError::Config(format!(
            "gradcheck needs two distinct graph indices below {}, got ({a}, {b})",
            data.graphs.len()
        )));
    }
    let mut model = Model::new(cfg.model_config(data.feature_dim()), &mut stream(cfg.seed, Stream::Init));
    let mut rng = stream(cfg.seed, Stream::Gradcheck);
    let fill = data.feature_mean();
    let mut views_i = Vec::with_capacity(2);
    let mut views_j = Vec::with_capacity(2);
    for g in [&data.graphs[a], &data.graphs[b]] {
        views_i.push(cfg.augment_i.apply(g, &fill, &mut rng)?);
        views_j.push(cfg.augment_j.apply(g, &fill, &mut rng)?);
    }
    let targets = batch_targets(&views_i, &views_j, cfg, &wl_config(cfg, data))?;
    let probe = Probe { views_i: &views_i, views_j: &views_j, targets: &targets, cfg };

    let mut tape = Tape::new();
    if let Some(kind) = opts.fault {
        tape.inject_fault(kind);
    }
    let (loss, parts) = batch_loss(&model, &mut tape, &views_i, &views_j, &targets, cfg)?;
    let base_pattern = tape.relu_pattern();
    let grads = tape.backward(loss)?;
    model.store.zero_grad();
    tape.accumulate(&grads, &mut model.store)?;
    drop(tape);

    let h = opts.step;
    let ids: Vec<_> = model.store.iter().map(|(id, _)| id).collect();
    let mut params = Vec::with_capacity(ids.len());
    let mut worst = (String::new(), 0);
    let mut max_rel = 0.0f64;
    let mut scalars = 0;
    let mut one_sided = 0;
    for id in ids {
        let analytic = model.store.get(id).grad.clone();
        let name = model.store.get(id).name.clone();
        let mut check = ParamCheck { name: name.clone(), scalars: analytic.data().len(), max_rel_err: 0.0, max_abs_err: 0.0 };
        for k in 0..analytic.data().len() {
            let original = model.store.get(id).value.data()[k];
            model.store.get_mut(id).value.data_mut()[k] = original + h;
            let (plus, plus_pattern) = probe.eval(&model)?;
            model.store.get_mut(id).value.data_mut()[k] = original - h;
            let (minus, minus_pattern) = probe.eval(&model)?;
            model.store.get_mut(id).value.data_mut()[k] = original;

            let numeric = match (plus_pattern == base_pattern, minus_pattern == base_pattern) {
                (true, true) => (plus - minus) / (2.0 * h),
                (true, false) => {
                    one_sided += 1;
                    (plus - parts.total) / h
                }
                (false, true) => {
                    one_sided += 1;
                    (parts.total - minus) / h
                }
                (false, false) => (plus - minus) / (2.0 * h),
            };
            let a = analytic.data()[k];
            let rel = relative_error(a, numeric, opts.floor);
            check.max_abs_err = check.max_abs_err.max((a - numeric).abs());
            if rel > check.max_rel_err {
                check.max_rel_err = rel;
            }
            if rel > max_rel || worst.0.is_empty() {
                max_rel = max_rel.max(rel);
                worst = (name.clone(), k);
            }
            scalars += 1;
        }
        params.push(check);
    }
    Ok(GradcheckReport {
        loss: parts.total,
        alpha: cfg.alpha,
        beta: cfg.beta,
        step: h,
        tolerance: opts.tolerance,
        max_rel_err: max_rel,
        worst,
        scalars,
        one_sided,
        params,
        seconds: start.elapsed().as_secs_f64(),
        passed: max_rel < opts.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{one_hot, GraphBuilder};

    fn pair() -> DatasetBundle {
        let make = |n: usize, edges: &[(usize, usize)]| {
            let labels: Vec<u32> = (0..n as u32).map(|v| v % 3).collect();
            GraphBuilder::new(n).edges(edges.iter().copied()).features(one_hot(&labels, 3)).labels(labels).build().unwrap()
        };
        DatasetBundle {
            name: "pair".into(),
            graphs: vec![
                make(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]),
                make(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]),
            ],
            label_vocab_size: 3,
            class_count: 1,
            class_map: vec![0],
            has_node_labels: true,
        }
    }

    fn small() -> TrainConfig {
        TrainConfig { hidden: 6, embedding: 5, subiso_width: 4, subiso_outer_width: 3, layers: 2, ..TrainConfig::default() }
    }

    #[test]
    fn relative_error_uses_floor() {
        assert_eq!(relative_error(1.0, 1.0, 1e-3), 0.0);
        assert!((relative_error(2.0, 1.0, 1e-3) - 0.5).abs() < 1e-15);
        assert!((relative_error(0.0, 1e-6, 1e-3) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn small_model_passes() {
        let r = gradcheck(&pair(), &small(), &GradcheckOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.scalars, r.params.iter().map(|p| p.scalars).sum::<usize>());
    }

    #[test]
    fn corrupted_backward_fails() {
        let opts = GradcheckOptions { fault: Some(OpKind::Sigmoid), ..GradcheckOptions::default() };
        let r = gradcheck(&pair(), &small(), &opts).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn contrastive_path_alone_is_checked() {
        let cfg = TrainConfig { alpha: 0.0, beta: 0.0, ..small() };
        let r = gradcheck(&pair(), &cfg, &GradcheckOptions::default()).unwrap();
        assert!(r.passed);
        let gin = r.params.iter().find(|p| p.name.starts_with("gin0")).unwrap();
        assert!(gin.scalars > 0);
    }

    #[test]
    fn bad_indices_are_rejected() {
        let opts = GradcheckOptions { graphs: (0, 0), ..GradcheckOptions::default() };
        assert!(gradcheck(&pair(), &small(), &opts).is_err());
    }
}
