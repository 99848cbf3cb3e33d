//! Metrics, cross-validation and report rendering.

mod crossval;
mod metrics;
mod report;

use thiserror::Error;

use crate::classifiers::ClassifierError;
use crate::dataset::DatasetError;

pub use crossval::{cross_validate, evaluate, stratified_folds, ClassEntry, EvalReport, Estimator, FoldMetrics, Predictor};
pub use metrics::{
    confusion_matrix, overall_accuracy, per_class_metrics, weighted_average, ClassMetrics, ConfusionMatrix,
    WeightedMetrics,
};
pub use report::{render_report, render_text, AccuracyRow, ClassifierBlock, LevelAggregate, LevelBlock, ReportDocument, ReportEntry};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{truth} true labels but {preds} predictions")]
    LengthMismatch { truth: usize, preds: usize },
    #[error("nothing to evaluate")]
    EmptyMatrix,
    #[error("confusion matrix must be square with one row per class")]
    NotSquare,
    #[error("need at least 2 folds, got {0}")]
    InvalidFolds(usize),
    #[error("class {class} has {rows} row(s), fewer than the {folds} folds")]
    InsufficientClassRows { class: String, rows: usize, folds: usize },
    #[error("duplicate report entry for {classifier} at {level} level")]
    DuplicateEntry { classifier: String, level: String },
    #[error("no reports to render")]
    NoReports,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}
