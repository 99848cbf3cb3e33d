use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::label::AttackClass;

/// `counts[i][j]` = rows of true class `i` predicted as class `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix<L = AttackClass> {
    classes: Vec<L>,
    counts: Vec<Vec<u64>>,
}

impl<L: Ord + Clone> ConfusionMatrix<L> {
    /// `classes` must be strictly increasing and `counts` square over them.
    pub fn from_counts(classes: Vec<L>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) || classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvalError::NotSquare);
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn classes(&self) -> &[L] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn count(&self, truth: &L, pred: &L) -> u64 {
        match (self.classes.binary_search(truth), self.classes.binary_search(pred)) {
            (Ok(i), Ok(j)) => self.counts[i][j],
            _ => 0,
        }
    }
}

/// Counts (truth, prediction) pairs. Classes are the observed labels in
/// canonical order.
pub fn confusion_matrix<L: Ord + Clone>(truth: &[L], preds: &[L]) -> Result<ConfusionMatrix<L>, EvalError> {
    if truth.len() != preds.len() {
        return Err(EvalError::LengthMismatch { truth: truth.len(), preds: preds.len() });
    }
    if truth.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    let classes: Vec<L> = truth.iter().chain(preds).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut counts = vec![vec![0u64; classes.len()]; classes.len()];
    for (t, p) in truth.iter().zip(preds) {
        let i = classes.binary_search(t).expect("collected above");
        let j = classes.binary_search(p).expect("collected above");
        counts[i][j] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

/// Trace over total.
pub fn overall_accuracy<L: Ord + Clone>(cm: &ConfusionMatrix<L>) -> Result<f64, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    Ok(cm.trace() as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True rows of the class.
    pub support: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 { 0.0 } else { num as f64 / den as f64 }
}

/// One-vs-rest precision, recall and F1 per class; zero denominators give 0.
pub fn per_class_metrics<L: Ord + Clone>(cm: &ConfusionMatrix<L>) -> Vec<(L, ClassMetrics)> {
    let k = cm.classes.len();
    (0..k)
        .map(|i| {
            let tp = cm.counts[i][i];
            let support: u64 = cm.counts[i].iter().sum();
            let predicted: u64 = (0..k).map(|r| cm.counts[r][i]).sum();
            let fp = predicted - tp;
            let fn_ = support - tp;
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            // 2TP / (2TP + FP + FN), identical to 2PR / (P + R) and 0 when both are 0
            let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
            (cm.classes[i].clone(), ClassMetrics { precision, recall, f1, support })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Support-weighted means of the per-class metrics.
pub fn weighted_average<L>(per_class: &[(L, ClassMetrics)]) -> WeightedMetrics {
    let total: u64 = per_class.iter().map(|(_, m)| m.support).sum();
    if total == 0 {
        return WeightedMetrics { precision: 0.0, recall: 0.0, f1: 0.0 };
    }
    let w = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|(_, m)| f(m) * m.support as f64).sum::<f64>() / total as f64;
    WeightedMetrics { precision: w(|m| m.precision), recall: w(|m| m.recall), f1: w(|m| m.f1) }
}
