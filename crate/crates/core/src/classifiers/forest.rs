//! Random forest: bagged CART trees with per-split feature sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, TreeConfig};
use super::{Hyperparameters, TrainSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Forest<T> {
    pub trees: Vec<DecisionTree<T>>,
    /// Features examined per split.
    pub max_features: usize,
    pub bootstrap: bool,
}

impl<T: Scalar> Forest<T> {
    /// Mean of the trees' leaf class frequencies.
    pub fn distribution(&self, row: &[T], n_classes: usize) -> Vec<T> {
        let mut acc = vec![T::zero(); n_classes];
        for t in &self.trees {
            for (a, &p) in acc.iter_mut().zip(t.distribution(row)) {
                *a = *a + p;
            }
        }
        let n = T::from_usize_lossy(self.trees.len());
        acc.into_iter().map(|a| a / n).collect()
    }
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters, seed: u64) -> Forest<T> {
    let d = data.n_features();
    let cfg = TreeConfig::for_forest(h, d, h.rf_max_features);
    let n = data.x.len();
    // Per-tree seeds come from the master seed up front, so the result does
    // not depend on how rayon schedules the trees.
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..h.rf_trees).map(|_| master.gen()).collect();
    let trees = seeds
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let rows = if h.rf_bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            grow(data, rows, &cfg, &mut rng)
        })
        .collect();
    Forest { trees, max_features: cfg.max_features, bootstrap: h.rf_bootstrap }
}
