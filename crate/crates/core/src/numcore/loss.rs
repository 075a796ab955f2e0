use crate::error::{Error, Result};

use super::Tensor;

/// Result of a softmax cross-entropy evaluation; keeps what the backward
/// pass needs.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossEntropy {
    pub loss: f64,
    pub probs: Vec<f64>,
    pub target: usize,
}

impl CrossEntropy {
    /// Adds `scale · (probs − onehot(target))` into `logits.grad()`.
    pub fn backward(&self, logits: &mut Tensor, scale: f64) {
        for (k, g) in logits.grad_mut().iter_mut().enumerate() {
            let onehot = if k == self.target { 1.0 } else { 0.0 };
            *g += scale * (self.probs[k] - onehot);
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<CrossEntropy> {
    if logits.len() < 2 {
        return Err(Error::Shape(format!(
            "softmax_cross_entropy needs at least 2 logits, got {}",
            logits.len()
        )));
    }
    if target >= logits.len() {
        return Err(Error::Index {
            index: target,
            len: logits.len(),
        });
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    let loss = -(logits[target] - max - log_sum);
    Ok(CrossEntropy {
        loss,
        probs: softmax(logits),
        target,
    })
}

/// Mean of squared elementwise differences.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "mse_loss: prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let sum: f64 = pred
        .values()
        .iter()
        .zip(target.values())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Adds `scale · 2(pred − target)/N` into `pred.grad()`.
pub fn mse_backward(pred: &mut Tensor, target: &Tensor, scale: f64) -> Result<()> {
    if pred.shape() != target.shape() {
        return Err(Error::Shape(format!(
            "mse_backward: prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let factor = scale * 2.0 / pred.len() as f64;
    let (pv, dp) = pred.split_mut();
    for ((g, &p), &t) in dp.iter_mut().zip(pv.iter()).zip(target.values()) {
        *g += factor * (p - t);
    }
    Ok(())
}
