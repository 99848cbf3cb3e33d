//! k-nearest neighbours with Euclidean distance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Hyperparameters, TrainSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KnnModel<T> {
    pub k: usize,
    pub x: Vec<Vec<T>>,
    pub y: Vec<usize>,
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q))
}

impl<T: Scalar> KnnModel<T> {
    /// Indices of the `k` nearest training rows, ordered by (distance, index).
    pub fn neighbours(&self, row: &[T]) -> Vec<(T, usize)> {
        let mut d: Vec<(T, usize)> = self.x.iter().enumerate().map(|(i, r)| (sq_dist(r, row), i)).collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d
    }

    /// Majority vote; ties go to the smaller summed distance, then to the
    /// earlier class. Scores are vote fractions.
    pub fn predict(&self, row: &[T], n_classes: usize) -> (usize, Vec<T>) {
        let nn = self.neighbours(row);
        let mut votes = vec![0usize; n_classes];
        let mut dist = vec![T::zero(); n_classes];
        for &(d2, i) in &nn {
            votes[self.y[i]] += 1;
            dist[self.y[i]] = dist[self.y[i]] + d2.sqrt();
        }
        let mut best = 0;
        for c in 1..n_classes {
            if votes[c] > votes[best] || (votes[c] == votes[best] && dist[c] < dist[best]) {
                best = c;
            }
        }
        let k = T::from_usize_lossy(nn.len());
        (best, votes.into_iter().map(|v| T::from_usize_lossy(v) / k).collect())
    }
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters) -> KnnModel<T> {
    KnnModel { k: h.knn_k, x: data.x.to_vec(), y: data.y.to_vec() }
}
