//! Class-weighted softmax cross-entropy.
//!
//! ```text
//! loss = Σ_b w[y_b] · (−log softmax(z_b)[y_b]) / Σ_b w[y_b]
//! ```
//!
//! Normalizing by the total sample weight (not the batch size) makes uniform
//! weights reproduce plain mean cross-entropy.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::weighting::WeightVector;

/// `B × C` logits, one true class per item, and per-class weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitBatch {
    logits: Vec<f64>,
    n_classes: usize,
    targets: Vec<usize>,
    class_weights: Vec<f64>,
}

impl LogitBatch {
    /// `logits` is row-major with one row of `weights.labels().len()`
    /// scores per item.
    pub fn new(logits: Vec<f64>, targets: Vec<usize>, weights: &WeightVector) -> Result<Self> {
        let n_classes = weights.weights().len();
        if targets.is_empty() {
            return Err(Error::EmptyInput);
        }
        if logits.len() != targets.len() * n_classes {
            return Err(Error::DimensionMismatch {
                expected: targets.len() * n_classes,
                found: logits.len(),
            });
        }
        for (item, &class) in targets.iter().enumerate() {
            if class >= n_classes {
                return Err(Error::ClassOutOfRange { item, class, classes: n_classes });
            }
        }
        if let Some(k) = logits.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFiniteLogit { item: k / n_classes, class: k % n_classes });
        }
        Ok(Self { logits, n_classes, targets, class_weights: weights.weights().to_vec() })
    }

    pub fn batch_size(&self) -> usize {
        self.targets.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    fn row(&self, b: usize) -> &[f64] {
        &self.logits[b * self.n_classes..(b + 1) * self.n_classes]
    }

    fn sample_weight(&self, b: usize) -> f64 {
        self.class_weights[self.targets[b]]
    }

    fn total_weight(&self) -> Result<f64> {
        let total: f64 = (0..self.batch_size()).map(|b| self.sample_weight(b)).sum();
        if total > 0.0 {
            Ok(total)
        } else {
            Err(Error::NoWeightedItems)
        }
    }
}

/// Returns (max, log Σ exp(z - max)).
fn shifted_log_sum_exp(row: &[f64]) -> (f64, f64) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|&z| libm::exp(z - max)).sum();
    (max, libm::log(sum))
}

/// Weighted negative log-likelihood of the true classes.
pub fn weighted_nll(batch: &LogitBatch) -> Result<f64> {
    let total = batch.total_weight()?;
    let mut loss = 0.0;
    for b in 0..batch.batch_size() {
        let w = batch.sample_weight(b);
        if w == 0.0 {
            continue;
        }
        let row = batch.row(b);
        let (max, lse) = shifted_log_sum_exp(row);
        let nll = lse - (row[batch.targets[b]] - max);
        loss += w * nll;
    }
    Ok(loss / total)
}

/// Gradient of [`weighted_nll`] with respect to the logits, row-major
/// `B × C`: `(w[y_b] / Σ w) · (softmax(z_b) − onehot(y_b))`.
pub fn weighted_nll_grad(batch: &LogitBatch) -> Result<Vec<f64>> {
    let total = batch.total_weight()?;
    let c = batch.n_classes;
    let mut grad = vec![0.0; batch.logits.len()];
    for b in 0..batch.batch_size() {
        let w = batch.sample_weight(b);
        if w == 0.0 {
            continue;
        }
        let scale = w / total;
        let row = batch.row(b);
        let (max, lse) = shifted_log_sum_exp(row);
        let out = &mut grad[b * c..(b + 1) * c];
        for (j, g) in out.iter_mut().enumerate() {
            let p = libm::exp(row[j] - max - lse);
            let target = if j == batch.targets[b] { 1.0 } else { 0.0 };
            *g = scale * (p - target);
        }
    }
    Ok(grad)
}
