//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::{Hyperparameters, TrainSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GaussianNb<T> {
    pub priors: Vec<T>,
    /// `means[class][feature]`
    pub means: Vec<Vec<T>>,
    /// Smoothed variances, each at least `var_floor`.
    pub variances: Vec<Vec<T>>,
    pub var_floor: T,
}

impl<T: Scalar> GaussianNb<T> {
    /// Unnormalized log joint likelihood per class.
    pub fn joint_log_likelihood(&self, row: &[T]) -> Vec<T> {
        let two_pi = T::lit(2.0 * std::f64::consts::PI);
        let half = T::lit(0.5);
        self.priors
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(&p, (mu, var))| {
                let mut ll = if p > T::zero() { p.ln() } else { T::neg_infinity() };
                for ((&x, &m), &v) in row.iter().zip(mu).zip(var) {
                    ll = ll - half * (two_pi * v).ln() - half * (x - m) * (x - m) / v;
                }
                ll
            })
            .collect()
    }

    /// Class posteriors.
    pub fn posteriors(&self, row: &[T]) -> Vec<T> {
        let jll = self.joint_log_likelihood(row);
        let max = jll.iter().copied().fold(T::neg_infinity(), T::max);
        if !max.is_finite() {
            return vec![T::one() / T::from_usize_lossy(jll.len()); jll.len()];
        }
        let e: Vec<T> = jll.iter().map(|&l| (l - max).exp()).collect();
        let total: T = e.iter().copied().sum();
        e.into_iter().map(|v| v / total).collect()
    }
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters) -> GaussianNb<T> {
    let d = data.n_features();
    let k = data.n_classes;
    let mut counts = vec![0usize; k];
    let mut sums = vec![vec![T::zero(); d]; k];
    for (row, &c) in data.x.iter().zip(data.y) {
        counts[c] += 1;
        for (s, &v) in sums[c].iter_mut().zip(row) {
            *s = *s + v;
        }
    }
    let means: Vec<Vec<T>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| s.iter().map(|&v| if n > 0 { v / T::from_usize_lossy(n) } else { T::zero() }).collect())
        .collect();
    let mut sq = vec![vec![T::zero(); d]; k];
    for (row, &c) in data.x.iter().zip(data.y) {
        for ((s, &v), &m) in sq[c].iter_mut().zip(row).zip(&means[c]) {
            *s = *s + (v - m) * (v - m);
        }
    }
    // floor = smoothing * largest per-feature variance over all rows
    let n = T::from_usize_lossy(data.x.len());
    let max_var = (0..d)
        .map(|f| {
            let mean = data.x.iter().map(|r| r[f]).sum::<T>() / n;
            data.x.iter().map(|r| (r[f] - mean) * (r[f] - mean)).sum::<T>() / n
        })
        .fold(T::zero(), T::max);
    let smoothing = T::lit(h.nb_var_smoothing);
    let var_floor = if max_var > T::zero() { smoothing * max_var } else { smoothing };
    let variances = sq
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|&v| if c > 0 { v / T::from_usize_lossy(c) } else { T::zero() } + var_floor).collect())
        .collect();
    let priors = counts.iter().map(|&c| T::from_usize_lossy(c) / n).collect();
    GaussianNb { priors, means, variances, var_floor }
}
