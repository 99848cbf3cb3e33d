//! Labeling, feature tables, CSV I/O, hold-out splitting and standardization.

mod labels;
mod split;
mod standardize;
mod table;

use thiserror::Error;

pub use labels::{apply_label_rules, ExtraPredicates, LabelQuery, LabelRuleSet};
pub use split::{holdout_indices, split_holdout};
pub use standardize::{standardize, Standardizer};
pub use table::{
    drop_leaky_columns, read_feature_csv, read_feature_csv_from, write_feature_csv, write_feature_csv_to,
    ColumnData, DropPolicy, FeatureLevel, FeatureRow, FeatureTable, Value, CLASS_COLUMN, IS_ATTACK_COLUMN,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid label rules: {0}")]
    InvalidRules(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("schema mismatch: unknown columns {unknown:?}, missing columns {missing:?}")]
    SchemaMismatch { unknown: Vec<String>, missing: Vec<String> },
    #[error("column {0:?} is not numeric")]
    NonNumericColumn(String),
    #[error("row {row}, column {column:?}: cannot parse {value:?}")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("train fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("class {class} has {rows} row(s); at least 2 are required to split")]
    DegenerateSplit { class: String, rows: usize },
    #[error("tables are incompatible: {0}")]
    Incompatible(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
