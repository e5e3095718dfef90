//! Contrastive loss, the two expertise regression losses and their sum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{Tape, Tensor, TensorError, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("contrastive loss needs at least 2 rows per view, got {0}")]
    TooFewRows(usize),
    #[error("views have shapes {0:?} and {1:?}")]
    ViewShape((usize, usize), (usize, usize)),
    #[error("row {row} of view {view} has zero norm")]
    ZeroNorm { view: char, row: usize },
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("targets and predictions differ in shape: {0:?} vs {1:?}")]
    Length((usize, usize), (usize, usize)),
    #[error("graph {graph}: target shape {target:?} does not match prediction shape {pred:?}")]
    GraphShape { graph: usize, target: (usize, usize), pred: (usize, usize) },
    #[error("empty batch")]
    EmptyBatch,
    #[error("loss coefficients must be non-negative, got alpha={alpha}, beta={beta}")]
    NegativeCoefficient { alpha: f64, beta: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn row_normalize(tape: &mut Tape, z: Var, view: char) -> Result<Var, ObjectiveError> {
    let t = tape.value(z);
    for r in 0..t.rows() {
        if t.row(r).iter().all(|&x| x == 0.0) {
            return Err(ObjectiveError::ZeroNorm { view, row: r });
        }
    }
    let sq = tape.square(z);
    let sums = tape.row_sum(sq);
    let norms = tape.sqrt(sums);
    Ok(tape.div_col(z, norms)?)
}

/// NT-Xent over aligned views: row `n` of `zi` and `zj` come from the same
/// graph. Only cross-view rows serve as negatives.
///
/// `L = -(1/N) sum_n log( exp(s(n,n)/tau) / sum_{m != n} exp(s(n,m)/tau) )`
/// with `s` the cosine similarity between row `n` of `zi` and row `m` of `zj`.
pub fn nt_xent(tape: &mut Tape, zi: Var, zj: Var, tau: f64) -> Result<Var, ObjectiveError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ObjectiveError::Temperature(tau));
    }
    let (si, sj) = (tape.value(zi).shape(), tape.value(zj).shape());
    if si != sj {
        return Err(ObjectiveError::ViewShape(si, sj));
    }
    let n = si.0;
    if n < 2 {
        return Err(ObjectiveError::TooFewRows(n));
    }
    let ni = row_normalize(tape, zi, 'i')?;
    let nj = row_normalize(tape, zj, 'j')?;
    let njt = tape.transpose(nj);
    let cos = tape.matmul(ni, njt)?;
    let logits = tape.scalar_mul(cos, 1.0 / tau);

    let eye = tape.constant(Tensor::identity(n));
    let off = tape.constant(Tensor::identity(n).map(|x| 1.0 - x));
    let diag = tape.mul(logits, eye)?;
    let positive = tape.row_sum(diag);
    let exps = tape.exp(logits);
    let masked = tape.mul(exps, off)?;
    let denom = tape.row_sum(masked);
    let log_denom = tape.log(denom);
    let per_row = tape.sub(positive, log_denom)?;
    let mean = tape.mean_all(per_row);
    Ok(tape.scalar_mul(mean, -1.0))
}

/// Mean squared error between two equally shaped tensors.
pub fn mse(tape: &mut Tape, targets: Var, preds: Var) -> Result<Var, ObjectiveError> {
    let (st, sp) = (tape.value(targets).shape(), tape.value(preds).shape());
    if st != sp {
        return Err(ObjectiveError::Length(st, sp));
    }
    let diff = tape.sub(targets, preds)?;
    let sq = tape.square(diff);
    Ok(tape.mean_all(sq))
}

/// Graph-tier loss: mean over the batch of `(y - y_hat)^2`.
pub fn mse_iso(tape: &mut Tape, targets: Var, preds: Var) -> Result<Var, ObjectiveError> {
    if tape.value(targets).data().is_empty() {
        return Err(ObjectiveError::EmptyBatch);
    }
    mse(tape, targets, preds)
}

/// Subgraph-tier loss: mean over `n_g^2` entries per graph, then mean over graphs.
pub fn mse_subiso(tape: &mut Tape, targets: &[Var], preds: &[Var]) -> Result<Var, ObjectiveError> {
    if targets.is_empty() {
        return Err(ObjectiveError::EmptyBatch);
    }
    if targets.len() != preds.len() {
        return Err(ObjectiveError::Length((targets.len(), 0), (preds.len(), 0)));
    }
    let mut terms = Vec::with_capacity(targets.len());
    for (graph, (&t, &p)) in targets.iter().zip(preds).enumerate() {
        let (st, sp) = (tape.value(t).shape(), tape.value(p).shape());
        if st != sp {
            return Err(ObjectiveError::GraphShape { graph, target: st, pred: sp });
        }
        terms.push(mse(tape, t, p)?);
    }
    let stacked = tape.concat_rows(&terms)?;
    Ok(tape.mean_all(stacked))
}

/// Per-term values of one loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_c: f64,
    pub l_iso: f64,
    pub l_subiso: f64,
    pub total: f64,
    pub alpha: f64,
    pub beta: f64,
}

fn check_coefficients(alpha: f64, beta: f64) -> Result<(), ObjectiveError> {
    if alpha >= 0.0 && beta >= 0.0 {
        Ok(())
    } else {
        Err(ObjectiveError::NegativeCoefficient { alpha, beta })
    }
}

/// `l_c + alpha * l_iso + beta * l_subiso`.
pub fn total_loss(l_c: f64, l_iso: f64, l_subiso: f64, alpha: f64, beta: f64) -> Result<LossBreakdown, ObjectiveError> {
    check_coefficients(alpha, beta)?;
    Ok(LossBreakdown { l_c, l_iso, l_subiso, total: l_c + alpha * l_iso + beta * l_subiso, alpha, beta })
}

/// Tape version of [`total_loss`]; returns the differentiable total and the breakdown.
pub fn combine(
    tape: &mut Tape,
    l_c: Var,
    l_iso: Var,
    l_subiso: Var,
    alpha: f64,
    beta: f64,
) -> Result<(Var, LossBreakdown), ObjectiveError> {
    check_coefficients(alpha, beta)?;
    let iso = tape.scalar_mul(l_iso, alpha);
    let sub = tape.scalar_mul(l_subiso, beta);
    let partial = tape.add(l_c, iso)?;
    let total = tape.add(partial, sub)?;
    let breakdown = LossBreakdown {
        l_c: tape.value(l_c).item()?,
        l_iso: tape.value(l_iso).item()?,
        l_subiso: tape.value(l_subiso).item()?,
        total: tape.value(total).item()?,
        alpha,
        beta,
    };
    Ok((total, breakdown))
}
