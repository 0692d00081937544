use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::argmax_rows;
use super::{AdamState, GcnError, GcnModel};
use crate::t2g::GraphBatch;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub acc: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,acc\n");
        for r in &self.epochs {
            let _ = writeln!(out, "{},{},{}", r.epoch, r.loss, r.acc);
        }
        out
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// Runs `epochs` passes over `batches`, visiting batches in a seeded shuffled
/// order and taking one Adam step per batch.
///
/// Each epoch's loss and accuracy are averaged over graphs, measured on the
/// pre-update forward pass of each batch.
pub fn train(
    model: &mut GcnModel,
    batches: &[GraphBatch],
    epochs: usize,
    adam: &mut AdamState,
    seed: u64,
) -> Result<TrainingLog, GcnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..batches.len()).collect();
    let mut log = TrainingLog::default();
    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        let mut seen = 0usize;
        for &b in &order {
            let batch = &batches[b];
            let (loss, grads, logits) = model.loss_grad_logits(batch)?;
            if !loss.is_finite() {
                return Err(GcnError::NonFinite(format!("loss at epoch {epoch}")));
            }
            let labels = batch.labels.as_ref().ok_or(GcnError::MissingLabels)?;
            correct += argmax_rows(&logits)
                .iter()
                .zip(labels)
                .filter(|(p, y)| p == y)
                .count();
            seen += labels.len();
            loss_sum += loss * labels.len() as f64;
            adam.update(model.params.tensors_mut(), grads.tensors());
        }
        if !model.params.is_finite() {
            return Err(GcnError::NonFinite(format!(
                "parameters after epoch {epoch}"
            )));
        }
        let denom = seen.max(1) as f64;
        log.epochs.push(EpochRecord {
            epoch,
            loss: loss_sum / denom,
            acc: correct as f64 / denom,
        });
    }
    Ok(log)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub f1_macro: f64,
    pub accuracy: f64,
    pub precision_macro: f64,
}

impl Metrics {
    /// Macro averages run over every class seen in either `truth` or `predicted`.
    /// A class never predicted has precision 0; a class never present has recall 0.
    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Result<Self, GcnError> {
        assert_eq!(truth.len(), predicted.len(), "prediction count");
        if truth.is_empty() {
            return Err(GcnError::EmptyEvalSet);
        }
        let classes: BTreeSet<usize> = truth.iter().chain(predicted).copied().collect();
        let mut precision_sum = 0.0;
        let mut f1_sum = 0.0;
        for &c in &classes {
            let pairs = || truth.iter().zip(predicted);
            let tp = pairs().filter(|&(&y, &p)| y == c && p == c).count() as f64;
            let fp = pairs().filter(|&(&y, &p)| y != c && p == c).count() as f64;
            let fn_ = pairs().filter(|&(&y, &p)| y == c && p != c).count() as f64;
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            precision_sum += precision;
            f1_sum += f1;
        }
        let n = classes.len() as f64;
        let correct = truth.iter().zip(predicted).filter(|(y, p)| y == p).count();
        Ok(Metrics {
            f1_macro: f1_sum / n,
            accuracy: correct as f64 / truth.len() as f64,
            precision_macro: precision_sum / n,
        })
    }
}

pub fn evaluate(model: &GcnModel, batches: &[GraphBatch]) -> Result<Metrics, GcnError> {
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    for batch in batches {
        let labels = batch.labels.as_ref().ok_or(GcnError::MissingLabels)?;
        truth.extend_from_slice(labels);
        predicted.extend(model.predict(batch)?);
    }
    Metrics::from_predictions(&truth, &predicted)
}
