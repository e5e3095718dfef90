//! Stratified k-fold evaluation with a multinomial logistic-regression probe.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{stream, ProbeConfig, Stream};
use super::PipelineError;
use crate::autodiff::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Held-out accuracy per fold, repeat-major.
    pub folds: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `folds`.
    pub std: f64,
}

impl ProbeResult {
    pub fn from_folds(folds: Vec<f64>) -> Self {
        let n = folds.len() as f64;
        let mean = folds.iter().sum::<f64>() / n;
        let std = (folds.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self { folds, mean, std }
    }
}

/// Assigns every sample a fold in `0..folds`, spreading each class evenly.
pub fn stratified_folds<R: Rng + ?Sized>(labels: &[usize], folds: usize, rng: &mut R) -> Vec<usize> {
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// L2-regularized softmax regression on standardized features, fit by
/// accelerated full-batch gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    classes: usize,
    dim: usize,
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// `dim x classes`, row-major.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    row.iter_mut().for_each(|x| *x /= sum);
}

/// Largest eigenvalue of `XᵀX / n` for `X` with an appended ones column.
fn gram_spectral_bound(x: &[Vec<f64>]) -> f64 {
    let d = x[0].len() + 1;
    let n = x.len() as f64;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut w = vec![0.0; d];
        for row in x {
            let dot: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() + v[d - 1];
            for (wk, a) in w.iter_mut().zip(row) {
                *wk += dot * a;
            }
            w[d - 1] += dot;
        }
        w.iter_mut().for_each(|a| *a /= n);
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|a| a / norm).collect();
    }
    lambda
}

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[usize], classes: usize, l2: f64, iterations: usize) -> Self {
        assert!(!x.is_empty() && x.len() == y.len());
        let dim = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in x {
            mean.iter_mut().zip(row).for_each(|(m, a)| *m += a / n);
        }
        let mut scale = vec![0.0; dim];
        for row in x {
            scale.iter_mut().zip(row).zip(&mean).for_each(|((s, a), m)| *s += (a - m).powi(2) / n);
        }
        let scale: Vec<f64> = scale.into_iter().map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        let xs: Vec<Vec<f64>> =
            x.iter().map(|row| row.iter().zip(&mean).zip(&scale).map(|((a, m), s)| (a - m) / s).collect()).collect();

        let step = 1.0 / (0.5 * gram_spectral_bound(&xs) + l2);
        let k = classes;
        let mut model = Self { classes, dim, mean, scale, weights: vec![0.0; dim * k], bias: vec![0.0; k] };
        let mut prev_w = model.weights.clone();
        let mut prev_b = model.bias.clone();
        let mut probs = vec![0.0; k];
        for t in 0..iterations {
            let momentum = t as f64 / (t as f64 + 3.0);
            let look_w: Vec<f64> =
                model.weights.iter().zip(&prev_w).map(|(w, p)| w + momentum * (w - p)).collect();
            let look_b: Vec<f64> = model.bias.iter().zip(&prev_b).map(|(b, p)| b + momentum * (b - p)).collect();
            let mut grad_w: Vec<f64> = look_w.iter().map(|w| l2 * w).collect();
            let mut grad_b = vec![0.0; k];
            for (row, &label) in xs.iter().zip(y) {
                probs.copy_from_slice(&look_b);
                for (j, a) in row.iter().enumerate() {
                    for c in 0..k {
                        probs[c] += a * look_w[j * k + c];
                    }
                }
                softmax_in_place(&mut probs);
                probs[label] -= 1.0;
                for (j, a) in row.iter().enumerate() {
                    for c in 0..k {
                        grad_w[j * k + c] += a * probs[c] / n;
                    }
                }
                grad_b.iter_mut().zip(&probs).for_each(|(g, p)| *g += p / n);
            }
            prev_w = std::mem::replace(&mut model.weights, look_w.iter().zip(&grad_w).map(|(w, g)| w - step * g).collect());
            prev_b = std::mem::replace(&mut model.bias, look_b.iter().zip(&grad_b).map(|(b, g)| b - step * g).collect());
        }
        model
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        assert_eq!(row.len(), self.dim);
        let mut scores = self.bias.clone();
        for (j, a) in row.iter().enumerate() {
            let z = (a - self.mean[j]) / self.scale[j];
            let w = &self.weights[j * self.classes..(j + 1) * self.classes];
            for (s, w) in scores.iter_mut().zip(w) {
                *s += z * w;
            }
        }
        let mut best = 0;
        for c in 1..self.classes {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        best
    }
}

/// `repeats` independent stratified `folds`-way splits; one accuracy per
/// held-out fold.
pub fn linear_probe_cv(
    embeddings: &Tensor,
    labels: &[usize],
    cfg: &ProbeConfig,
    seed: u64,
) -> Result<ProbeResult, PipelineError> {
    if embeddings.rows() != labels.len() {
        return Err(PipelineError::Probe(format!("{} embedding rows but {} labels", embeddings.rows(), labels.len())));
    }
    if cfg.folds < 2 || cfg.repeats == 0 {
        return Err(PipelineError::Probe(format!("need folds >= 2 and repeats >= 1, got {} and {}", cfg.folds, cfg.repeats)));
    }
    if labels.len() < cfg.folds {
        return Err(PipelineError::Probe(format!("{} samples cannot fill {} folds", labels.len(), cfg.folds)));
    }
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let present = (0..classes).filter(|c| labels.contains(c)).count();
    if present < 2 {
        return Err(PipelineError::Probe("labels contain a single class".into()));
    }
    if !embeddings.is_finite() {
        return Err(PipelineError::Probe("embeddings contain non-finite values".into()));
    }
    let rows: Vec<Vec<f64>> = (0..embeddings.rows()).map(|r| embeddings.row(r).to_vec()).collect();
    let mut rng = stream(seed, Stream::Probe);
    let mut accuracies = Vec::with_capacity(cfg.folds * cfg.repeats);
    for _ in 0..cfg.repeats {
        let assignment = stratified_folds(labels, cfg.folds, &mut rng);
        for fold in 0..cfg.folds {
            let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
            for (i, &f) in assignment.iter().enumerate() {
                if f == fold {
                    test.push(i);
                } else {
                    train_x.push(rows[i].clone());
                    train_y.push(labels[i]);
                }
            }
            let clf = LogisticRegression::fit(&train_x, &train_y, classes, cfg.l2, cfg.iterations);
            let correct = test.iter().filter(|&&i| clf.predict(&rows[i]) == labels[i]).count();
            accuracies.push(correct as f64 / test.len() as f64);
        }
    }
    Ok(ProbeResult::from_folds(accuracies))
}
