//! Classical classifiers with deterministic fit and predict.
//!
//! Every model is trained from a numeric [`FeatureTable`] and predicts from
//! rows (or tables) with the same feature columns. Models serialize to a
//! versioned JSON document; deserializing and predicting reproduces the
//! original predictions exactly.

mod forest;
mod knn;
mod logistic;
mod naive_bayes;
mod svm_linear;
mod svm_rbf;
mod tree;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{FeatureTable, Standardizer};
use crate::label::AttackClass;
use crate::scalar::Scalar;

pub use forest::Forest;
pub use knn::KnnModel;
pub use logistic::{logistic_loss_grad, LinearModel};
pub use naive_bayes::GaussianNb;
pub use svm_rbf::{auto_gamma, smo_binary, RbfMachine, RbfModel, SmoReport, SmoSolution};
pub use tree::{best_split, DecisionTree, Node, Split};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data has a single class ({0})")]
    SingleClass(AttackClass),
    #[error("training data is empty")]
    EmptyTrain,
    #[error("column {0:?} is not numeric")]
    NonNumericColumn(String),
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature column {0:?} missing from input table")]
    MissingFeature(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "lr")]
    Lr,
    #[serde(rename = "nb")]
    Nb,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "dt")]
    Dt,
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "svm-linear")]
    SvmLinear,
    #[serde(rename = "svm-rbf")]
    SvmRbf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 7] = [
        ClassifierKind::Lr,
        ClassifierKind::Nb,
        ClassifierKind::Knn,
        ClassifierKind::Dt,
        ClassifierKind::Rf,
        ClassifierKind::SvmLinear,
        ClassifierKind::SvmRbf,
    ];

    /// Command-line identifier.
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "lr",
            ClassifierKind::Nb => "nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Dt => "dt",
            ClassifierKind::Rf => "rf",
            ClassifierKind::SvmLinear => "svm-linear",
            ClassifierKind::SvmRbf => "svm-rbf",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Lr => "LR",
            ClassifierKind::Nb => "NB",
            ClassifierKind::Knn => "k-NN",
            ClassifierKind::Dt => "DT",
            ClassifierKind::Rf => "RF",
            ClassifierKind::SvmLinear => "SVM (Linear Kernel)",
            ClassifierKind::SvmRbf => "SVM (RBF Kernel)",
        }
    }

    /// Whether inputs are z-scored by default.
    pub fn standardizes_by_default(self) -> bool {
        matches!(self, ClassifierKind::Lr | ClassifierKind::Knn | ClassifierKind::SvmLinear | ClassifierKind::SvmRbf)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ClassifierError::InvalidHyperparameter(format!("unknown classifier {s:?}")))
    }
}

/// Number of features considered at each forest split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt() as usize).max(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(m) => m.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparameters {
    pub knn_k: usize,
    pub lr_lambda: f64,
    pub lr_max_epochs: usize,
    pub lr_tol: f64,
    /// Variance floor as a fraction of the largest feature variance.
    pub nb_var_smoothing: f64,
    pub dt_min_samples_split: usize,
    pub dt_max_depth: Option<usize>,
    pub rf_trees: usize,
    pub rf_max_features: MaxFeatures,
    pub rf_bootstrap: bool,
    pub svm_c: f64,
    /// `None` picks 1 / (d * mean feature variance).
    pub svm_gamma: Option<f64>,
    pub svm_tol: f64,
    pub svm_max_iter: Option<usize>,
    pub svm_linear_max_epochs: usize,
    /// Overrides the per-kind standardization default.
    pub standardize: Option<bool>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            knn_k: 5,
            lr_lambda: 1e-4,
            lr_max_epochs: 1000,
            lr_tol: 1e-6,
            nb_var_smoothing: 1e-9,
            dt_min_samples_split: 2,
            dt_max_depth: None,
            rf_trees: 100,
            rf_max_features: MaxFeatures::Sqrt,
            rf_bootstrap: true,
            svm_c: 1.0,
            svm_gamma: None,
            svm_tol: 1e-3,
            svm_max_iter: None,
            svm_linear_max_epochs: 1000,
            standardize: None,
        }
    }
}

impl Hyperparameters {
    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidHyperparameter(m.to_string()));
        if self.knn_k == 0 {
            return bad("knn_k must be at least 1");
        }
        if !(self.lr_lambda >= 0.0) || !(self.lr_tol > 0.0) {
            return bad("lr_lambda must be >= 0 and lr_tol > 0");
        }
        if !(self.nb_var_smoothing > 0.0) {
            return bad("nb_var_smoothing must be > 0");
        }
        if self.dt_min_samples_split < 2 {
            return bad("dt_min_samples_split must be at least 2");
        }
        if self.rf_trees == 0 {
            return bad("rf_trees must be at least 1");
        }
        if matches!(self.rf_max_features, MaxFeatures::Count(0)) {
            return bad("rf_max_features must be at least 1");
        }
        if !(self.svm_c > 0.0) || !(self.svm_tol > 0.0) {
            return bad("svm_c and svm_tol must be > 0");
        }
        if let Some(g) = self.svm_gamma {
            if !(g > 0.0) {
                return bad("svm_gamma must be > 0");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    #[serde(default)]
    pub hyper: Hyperparameters,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec { kind, hyper: Hyperparameters::default(), seed }
    }

    pub fn standardizes(&self) -> bool {
        self.hyper.standardize.unwrap_or_else(|| self.kind.standardizes_by_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "T: Scalar")]
pub enum ModelParams<T> {
    Linear(LinearModel<T>),
    NaiveBayes(GaussianNb<T>),
    Knn(KnnModel<T>),
    Tree(DecisionTree<T>),
    Forest(Forest<T>),
    Rbf(RbfModel<T>),
}

/// Predicted class with one score per model class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub class: AttackClass,
    pub scores: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Model<T> {
    pub format_version: u32,
    pub kind: ClassifierKind,
    pub classes: Vec<AttackClass>,
    pub feature_names: Vec<String>,
    pub spec: ClassifierSpec,
    pub standardizer: Option<Standardizer<T>>,
    pub params: ModelParams<T>,
}

/// Training matrix with labels as indices into the class list.
pub(crate) struct TrainSet<'a, T> {
    pub x: &'a [Vec<T>],
    pub y: &'a [usize],
    pub n_classes: usize,
}

impl<T> TrainSet<'_, T> {
    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

/// Index of the largest score; the earliest wins ties.
pub(crate) fn argmax<T: Scalar>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// One-vs-rest targets: +1 for `positive`, -1 otherwise.
pub(crate) fn signs<T: Scalar>(y: &[usize], positive: usize) -> Vec<T> {
    y.iter().map(|&c| if c == positive { T::one() } else { -T::one() }).collect()
}

/// Binary problems solved for a one-vs-rest reduction. Two classes need a
/// single machine whose positive class is the second one.
pub(crate) fn ovr_positives(n_classes: usize) -> Vec<usize> {
    if n_classes == 2 { vec![1] } else { (0..n_classes).collect() }
}

/// Expands raw one-vs-rest margins into per-class scores.
pub(crate) fn ovr_scores<T: Scalar>(margins: Vec<T>, n_classes: usize) -> Vec<T> {
    if n_classes == 2 { vec![-margins[0], margins[0]] } else { margins }
}

/// Fits a model on every numeric feature column of `train`.
pub fn fit<T: Scalar>(spec: &ClassifierSpec, train: &FeatureTable<T>) -> Result<Model<T>, ClassifierError> {
    spec.hyper.validate()?;
    if train.n_rows() == 0 {
        return Err(ClassifierError::EmptyTrain);
    }
    if let Some(name) = train.first_text_column() {
        return Err(ClassifierError::NonNumericColumn(name.to_string()));
    }
    let mut classes = train.classes().to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(ClassifierError::SingleClass(classes[0]));
    }
    let y: Vec<usize> =
        train.classes().iter().map(|c| classes.binary_search(c).expect("class collected above")).collect();
    let x = train.feature_matrix().map_err(|e| ClassifierError::NonNumericColumn(e.to_string()))?;
    let names = train.column_names().to_vec();
    fit_matrix(spec, names, &x, &y, classes)
}

/// Fits on an explicit matrix. `y` indexes into `classes`.
pub fn fit_matrix<T: Scalar>(
    spec: &ClassifierSpec,
    feature_names: Vec<String>,
    x: &[Vec<T>],
    y: &[usize],
    classes: Vec<AttackClass>,
) -> Result<Model<T>, ClassifierError> {
    spec.hyper.validate()?;
    if x.is_empty() {
        return Err(ClassifierError::EmptyTrain);
    }
    let d = feature_names.len();
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(ClassifierError::DimensionMismatch { expected: d, found: r.len() });
    }
    if classes.len() < 2 {
        return Err(ClassifierError::SingleClass(classes.first().copied().unwrap_or(AttackClass::Benign)));
    }
    let standardizer = spec.standardizes().then(|| Standardizer::fit_matrix(feature_names.clone(), x));
    let scaled;
    let x = match &standardizer {
        Some(s) => {
            scaled = s.transform_matrix(x);
            &scaled[..]
        }
        None => x,
    };
    let data = TrainSet { x, y, n_classes: classes.len() };
    let h = &spec.hyper;
    log::debug!("fitting {} on {} rows x {} features", spec.kind, x.len(), d);
    let params = match spec.kind {
        ClassifierKind::Lr => ModelParams::Linear(logistic::fit(&data, h)),
        ClassifierKind::Nb => ModelParams::NaiveBayes(naive_bayes::fit(&data, h)),
        ClassifierKind::Knn => ModelParams::Knn(knn::fit(&data, h)),
        ClassifierKind::Dt => ModelParams::Tree(tree::fit(&data, &tree::TreeConfig::from_hyper(h, d), spec.seed)),
        ClassifierKind::Rf => ModelParams::Forest(forest::fit(&data, h, spec.seed)),
        ClassifierKind::SvmLinear => ModelParams::Linear(svm_linear::fit(&data, h, spec.seed)),
        ClassifierKind::SvmRbf => ModelParams::Rbf(svm_rbf::fit(&data, h)),
    };
    Ok(Model {
        format_version: MODEL_FORMAT_VERSION,
        kind: spec.kind,
        classes,
        feature_names,
        spec: spec.clone(),
        standardizer,
        params,
    })
}

impl<T: Scalar> Model<T> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Scores one row given in `feature_names` order.
    pub fn predict_row(&self, row: &[T]) -> Result<Prediction<T>, ClassifierError> {
        if row.len() != self.n_features() {
            return Err(ClassifierError::DimensionMismatch { expected: self.n_features(), found: row.len() });
        }
        let scaled;
        let row = match &self.standardizer {
            Some(s) => {
                scaled = s.transform_row(row);
                &scaled[..]
            }
            None => row,
        };
        let n = self.classes.len();
        let (idx, scores) = match &self.params {
            ModelParams::Linear(m) => {
                let s = if self.kind == ClassifierKind::Lr { m.probabilities(row, n) } else { m.margins(row, n) };
                (argmax(&s), s)
            }
            ModelParams::NaiveBayes(m) => {
                let s = m.posteriors(row);
                (argmax(&s), s)
            }
            ModelParams::Knn(m) => m.predict(row, n),
            ModelParams::Tree(m) => {
                let s = m.distribution(row).to_vec();
                (argmax(&s), s)
            }
            ModelParams::Forest(m) => {
                let s = m.distribution(row, n);
                (argmax(&s), s)
            }
            ModelParams::Rbf(m) => {
                let s = m.margins(row, n);
                (argmax(&s), s)
            }
        };
        Ok(Prediction { class: self.classes[idx], scores })
    }

    /// Predicts every row of a matrix whose columns follow `feature_names`.
    pub fn predict_matrix(&self, x: &[Vec<T>]) -> Result<Vec<AttackClass>, ClassifierError> {
        use rayon::prelude::*;
        x.par_iter().map(|r| self.predict_row(r).map(|p| p.class)).collect()
    }

    /// Predicts every row of a table, selecting the model's feature columns by name.
    pub fn predict_table(&self, t: &FeatureTable<T>) -> Result<Vec<AttackClass>, ClassifierError> {
        let x = self.select_features(t)?;
        self.predict_matrix(&x)
    }

    /// Row-major matrix of the model's feature columns taken from `t`.
    pub fn select_features(&self, t: &FeatureTable<T>) -> Result<Vec<Vec<T>>, ClassifierError> {
        let mut cols = Vec::with_capacity(self.n_features());
        for name in &self.feature_names {
            let c = t.numeric_column(name).map_err(|e| match e {
                crate::dataset::DatasetError::MissingColumn(n) => ClassifierError::MissingFeature(n),
                _ => ClassifierError::NonNumericColumn(name.clone()),
            })?;
            cols.push(c);
        }
        Ok((0..t.n_rows()).map(|r| cols.iter().map(|c| c[r]).collect()).collect())
    }

    pub fn to_json(&self) -> Result<String, ClassifierError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ClassifierError> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let v: Version = serde_json::from_str(s)?;
        if v.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifierError::UnsupportedVersion(v.format_version));
        }
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        let mut s = self.to_json()?;
        s.push('\n');
        fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.as_str()));
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn hyperparameter_validation() {
        assert!(Hyperparameters::default().validate().is_ok());
        let bad = [
            Hyperparameters { knn_k: 0, ..Default::default() },
            Hyperparameters { rf_trees: 0, ..Default::default() },
            Hyperparameters { svm_c: 0.0, ..Default::default() },
            Hyperparameters { svm_gamma: Some(-1.0), ..Default::default() },
            Hyperparameters { nb_var_smoothing: f64::NAN, ..Default::default() },
        ];
        for h in bad {
            assert!(matches!(h.validate(), Err(ClassifierError::InvalidHyperparameter(_))), "{h:?}");
        }
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(20), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(MaxFeatures::Count(50).resolve(7), 7);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0f32]), 0);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let names = vec!["a".to_string()];
        let spec = ClassifierSpec::new(ClassifierKind::Dt, 0);
        let err = fit_matrix::<f64>(&spec, names.clone(), &[], &[], vec![AttackClass::Benign, AttackClass::MqttBf]);
        assert!(matches!(err, Err(ClassifierError::EmptyTrain)));
        let err = fit_matrix(&spec, names.clone(), &[vec![1.0]], &[0], vec![AttackClass::Benign]);
        assert!(matches!(err, Err(ClassifierError::SingleClass(AttackClass::Benign))));
        let err = fit_matrix(&spec, names, &[vec![1.0, 2.0]], &[0], vec![AttackClass::Benign, AttackClass::Sparta]);
        assert!(matches!(err, Err(ClassifierError::DimensionMismatch { expected: 1, found: 2 })));
    }

    #[test]
    fn predict_checks_width() {
        let spec = ClassifierSpec::new(ClassifierKind::Nb, 0);
        let m = fit_matrix(
            &spec,
            vec!["a".into()],
            &[vec![0.0], vec![1.0]],
            &[0, 1],
            vec![AttackClass::Benign, AttackClass::MqttBf],
        )
        .unwrap();
        assert!(matches!(m.predict_row(&[0.0, 1.0]), Err(ClassifierError::DimensionMismatch { .. })));
    }

    #[test]
    fn version_is_checked() {
        let spec = ClassifierSpec::new(ClassifierKind::Knn, 0);
        let m = fit_matrix(
            &spec,
            vec!["a".into()],
            &[vec![0.0], vec![1.0]],
            &[0, 1],
            vec![AttackClass::Benign, AttackClass::MqttBf],
        )
        .unwrap();
        let json = m.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(Model::<f64>::from_json(&json), Err(ClassifierError::UnsupportedVersion(9))));
    }
}
