use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion_matrix, overall_accuracy, per_class_metrics, weighted_average, ClassMetrics, ConfusionMatrix, WeightedMetrics};
use super::EvalError;
use crate::classifiers::{fit, ClassifierSpec, Model};
use crate::dataset::{FeatureLevel, FeatureTable};
use crate::label::AttackClass;
use crate::scalar::Scalar;

/// Something that can be trained on a feature table.
pub trait Estimator<T>: Sync {
    type Fitted: Predictor<T> + Send;

    fn fit(&self, train: &FeatureTable<T>) -> Result<Self::Fitted, EvalError>;

    /// Echoed into reports when available.
    fn spec(&self) -> Option<ClassifierSpec> {
        None
    }
}

pub trait Predictor<T> {
    fn predict(&self, t: &FeatureTable<T>) -> Result<Vec<AttackClass>, EvalError>;
}

impl<T: Scalar> Estimator<T> for ClassifierSpec {
    type Fitted = Model<T>;

    fn fit(&self, train: &FeatureTable<T>) -> Result<Model<T>, EvalError> {
        Ok(fit(self, train)?)
    }

    fn spec(&self) -> Option<ClassifierSpec> {
        Some(self.clone())
    }
}

impl<T: Scalar> Predictor<T> for Model<T> {
    fn predict(&self, t: &FeatureTable<T>) -> Result<Vec<AttackClass>, EvalError> {
        Ok(self.predict_table(t)?)
    }
}

/// Stratified, seeded k-fold partition. Each class's rows are shuffled, the
/// classes are laid end to end in canonical order and position `p` goes to
/// fold `p mod k`, so per-class fold sizes differ by at most one.
pub fn stratified_folds<L: Ord + Clone + Debug>(labels: &[L], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(k));
    }
    let mut by_class: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if let Some((l, rows)) = by_class.iter().find(|(_, r)| r.len() < k) {
        return Err(EvalError::InsufficientClassRows { class: format!("{l:?}"), rows: rows.len(), folds: k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut pos = 0;
    for rows in by_class.values_mut() {
        rows.shuffle(&mut rng);
        for &r in rows.iter() {
            folds[pos % k].push(r);
            pos += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub rows: usize,
    pub accuracy: f64,
    pub weighted: WeightedMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub class: AttackClass,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: Option<ClassifierSpec>,
    pub level: FeatureLevel,
    pub rows: usize,
    /// 0 for a single train/test evaluation.
    pub folds: usize,
    pub confusion: ConfusionMatrix<AttackClass>,
    pub overall_accuracy: f64,
    pub per_class: Vec<ClassEntry>,
    pub weighted: WeightedMetrics,
    pub per_fold: Vec<FoldMetrics>,
    /// Unweighted mean over folds; absent without folds.
    pub fold_mean: Option<FoldMetrics>,
}

impl EvalReport {
    pub fn from_predictions(
        truth: &[AttackClass],
        preds: &[AttackClass],
        spec: Option<ClassifierSpec>,
        level: FeatureLevel,
    ) -> Result<Self, EvalError> {
        let cm = confusion_matrix(truth, preds)?;
        let pc = per_class_metrics(&cm);
        Ok(EvalReport {
            spec,
            level,
            rows: truth.len(),
            folds: 0,
            overall_accuracy: overall_accuracy(&cm)?,
            weighted: weighted_average(&pc),
            per_class: pc.into_iter().map(|(class, metrics)| ClassEntry { class, metrics }).collect(),
            confusion: cm,
            per_fold: Vec::new(),
            fold_mean: None,
        })
    }

    pub fn class_metrics(&self, class: AttackClass) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|e| e.class == class).map(|e| &e.metrics)
    }
}

fn fold_metrics(fold: usize, truth: &[AttackClass], preds: &[AttackClass]) -> Result<FoldMetrics, EvalError> {
    let cm = confusion_matrix(truth, preds)?;
    Ok(FoldMetrics {
        fold,
        rows: truth.len(),
        accuracy: overall_accuracy(&cm)?,
        weighted: weighted_average(&per_class_metrics(&cm)),
    })
}

/// Stratified k-fold cross-validation. Each fold refits the estimator
/// (including any standardizer) on the other folds; the headline metrics pool
/// every out-of-fold prediction into one confusion matrix.
pub fn cross_validate<T, E>(est: &E, t: &FeatureTable<T>, k: usize, seed: u64) -> Result<EvalReport, EvalError>
where
    T: Scalar,
    E: Estimator<T>,
{
    let folds = stratified_folds(t.classes(), k, seed)?;
    let n = t.n_rows();
    let results: Vec<Result<Vec<AttackClass>, EvalError>> = folds
        .par_iter()
        .map(|test_rows| {
            let mut in_test = vec![false; n];
            for &r in test_rows {
                in_test[r] = true;
            }
            let train_rows: Vec<usize> = (0..n).filter(|&r| !in_test[r]).collect();
            let model = est.fit(&t.select_rows(&train_rows))?;
            model.predict(&t.select_rows(test_rows))
        })
        .collect();
    let mut pooled = vec![AttackClass::Benign; n];
    let mut per_fold = Vec::with_capacity(k);
    for (i, (rows, preds)) in folds.iter().zip(results).enumerate() {
        let preds = preds?;
        let truth: Vec<AttackClass> = rows.iter().map(|&r| t.classes()[r]).collect();
        per_fold.push(fold_metrics(i, &truth, &preds)?);
        for (&r, p) in rows.iter().zip(preds) {
            pooled[r] = p;
        }
    }
    let mut report = EvalReport::from_predictions(t.classes(), &pooled, est.spec(), t.level())?;
    let kf = k as f64;
    let mean = |f: fn(&FoldMetrics) -> f64| per_fold.iter().map(f).sum::<f64>() / kf;
    report.fold_mean = Some(FoldMetrics {
        fold: k,
        rows: n / k,
        accuracy: mean(|m| m.accuracy),
        weighted: WeightedMetrics {
            precision: mean(|m| m.weighted.precision),
            recall: mean(|m| m.weighted.recall),
            f1: mean(|m| m.weighted.f1),
        },
    });
    report.folds = k;
    report.per_fold = per_fold;
    Ok(report)
}

/// Scores a trained model on a labeled table.
pub fn evaluate<T: Scalar>(model: &Model<T>, t: &FeatureTable<T>) -> Result<EvalReport, EvalError> {
    let preds = model.predict_table(t)?;
    EvalReport::from_predictions(t.classes(), &preds, Some(model.spec.clone()), t.level())
}
