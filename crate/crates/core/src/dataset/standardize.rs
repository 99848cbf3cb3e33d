use serde::{Deserialize, Serialize};

use super::{DatasetError, FeatureTable};
use crate::scalar::Scalar;

/// Per-column z-scoring fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Standardizer<T> {
    pub columns: Vec<String>,
    pub means: Vec<T>,
    /// Population standard deviations; zero marks a constant column that is
    /// centered but not scaled.
    pub stds: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    /// Fits on a row-major matrix.
    pub fn fit_matrix(columns: Vec<String>, x: &[Vec<T>]) -> Self {
        let d = columns.len();
        let n = T::from_usize_lossy(x.len().max(1));
        let mut means = vec![T::zero(); d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m = *m + *v;
            }
        }
        for m in means.iter_mut() {
            *m = *m / n;
        }
        let mut vars = vec![T::zero(); d];
        for row in x {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                let dv = *v - *m;
                *s = *s + dv * dv;
            }
        }
        let stds = vars.into_iter().map(|s| (s / n).sqrt()).collect();
        Standardizer { columns, means, stds }
    }

    pub fn fit(train: &FeatureTable<T>) -> Result<Self, DatasetError> {
        let x = train.feature_matrix()?;
        Ok(Self::fit_matrix(train.column_names().to_vec(), &x))
    }

    pub fn transform_value(&self, col: usize, v: T) -> T {
        let centered = v - self.means[col];
        if self.stds[col] > T::zero() {
            centered / self.stds[col]
        } else {
            centered
        }
    }

    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        row.iter().enumerate().map(|(i, &v)| self.transform_value(i, v)).collect()
    }

    pub fn transform_matrix(&self, x: &[Vec<T>]) -> Vec<Vec<T>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn transform(&self, t: &FeatureTable<T>) -> Result<FeatureTable<T>, DatasetError> {
        if t.column_names() != self.columns.as_slice() {
            return Err(DatasetError::Incompatible(format!(
                "standardizer fitted on {} columns, table has {}",
                self.columns.len(),
                t.n_columns()
            )));
        }
        if let Some(name) = t.first_text_column() {
            return Err(DatasetError::NonNumericColumn(name.to_string()));
        }
        Ok(t.map_numeric(|i, v| self.transform_value(i, v)))
    }
}

/// Fits on `train` and transforms `train` followed by each of `others`.
pub fn standardize<T: Scalar>(
    train: &FeatureTable<T>,
    others: &[&FeatureTable<T>],
) -> Result<(Standardizer<T>, Vec<FeatureTable<T>>), DatasetError> {
    let s = Standardizer::fit(train)?;
    let mut out = vec![s.transform(train)?];
    for t in others {
        out.push(s.transform(t)?);
    }
    Ok((s, out))
}
