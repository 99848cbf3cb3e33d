//! One-vs-rest L2-regularized logistic regression, trained by Nesterov
//! accelerated gradient descent with gradient-based restarts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ovr_positives, ovr_scores, signs, Hyperparameters, TrainSet};
use crate::scalar::Scalar;

/// One weight vector and bias per one-vs-rest machine. Shared by logistic
/// regression and the linear SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearModel<T> {
    pub weights: Vec<Vec<T>>,
    pub bias: Vec<T>,
}

impl<T: Scalar> LinearModel<T> {
    fn raw(&self, row: &[T]) -> Vec<T> {
        self.weights.iter().zip(&self.bias).map(|(w, &b)| dot(w, row) + b).collect()
    }

    /// Per-class decision values.
    pub fn margins(&self, row: &[T], n_classes: usize) -> Vec<T> {
        ovr_scores(self.raw(row), n_classes)
    }

    /// Per-class probabilities; one-vs-rest outputs are normalized to sum to one.
    pub fn probabilities(&self, row: &[T], n_classes: usize) -> Vec<T> {
        let p: Vec<T> = self.raw(row).into_iter().map(sigmoid).collect();
        if n_classes == 2 {
            return vec![T::one() - p[0], p[0]];
        }
        let total: T = p.iter().copied().sum();
        if total > T::zero() {
            p.into_iter().map(|v| v / total).collect()
        } else {
            vec![T::one() / T::from_usize_lossy(n_classes); n_classes]
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// log(1 + exp(-m)) without overflow.
fn log1p_exp_neg<T: Scalar>(m: T) -> T {
    if m > T::zero() { (-m).exp().ln_1p() } else { -m + m.exp().ln_1p() }
}

/// Mean logistic loss plus `lambda / 2 * |w|^2` (bias unpenalized) and its
/// gradient, for targets `s` in {-1, +1}. Returns `(loss, grad_w, grad_b)`.
pub fn logistic_loss_grad<T: Scalar>(x: &[Vec<T>], s: &[T], w: &[T], b: T, lambda: T) -> (T, Vec<T>, T) {
    let n = T::from_usize_lossy(x.len());
    let mut loss = T::zero();
    let mut gw = vec![T::zero(); w.len()];
    let mut gb = T::zero();
    for (row, &si) in x.iter().zip(s) {
        let m = si * (dot(w, row) + b);
        loss = loss + log1p_exp_neg(m);
        // d/dz log(1 + exp(-s z)) = -s * sigmoid(-m)
        let c = -si * sigmoid(-m);
        for (g, &v) in gw.iter_mut().zip(row) {
            *g = *g + c * v;
        }
        gb = gb + c;
    }
    let half = T::lit(0.5);
    loss = loss / n + half * lambda * dot(w, w);
    for (g, &wi) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * wi;
    }
    (loss, gw, gb / n)
}

/// Upper estimate of the largest eigenvalue of X'X / n with a bias column,
/// by power iteration capped at the trace bound.
fn gram_top_eigenvalue<T: Scalar>(x: &[Vec<T>]) -> T {
    let d = x[0].len() + 1;
    let n = T::from_usize_lossy(x.len());
    let trace = x.iter().map(|r| dot(r, r) + T::one()).sum::<T>() / n;
    let mut v = vec![T::one() / T::from_usize_lossy(d).sqrt(); d];
    let mut est = trace;
    for _ in 0..50 {
        let mut next = vec![T::zero(); d];
        for r in x {
            let p = dot(&v[..d - 1], r) + v[d - 1];
            for (a, &ri) in next.iter_mut().zip(r) {
                *a = *a + p * ri;
            }
            next[d - 1] = next[d - 1] + p;
        }
        let norm = next.iter().map(|&a| a * a).sum::<T>().sqrt() / n;
        if norm <= T::zero() {
            break;
        }
        est = norm;
        let scale = n * norm;
        v = next.into_iter().map(|a| a / scale).collect();
    }
    (est * T::lit(1.5)).min(trace)
}

fn fit_binary<T: Scalar>(x: &[Vec<T>], s: &[T], h: &Hyperparameters) -> (Vec<T>, T) {
    let d = x[0].len();
    let lambda = T::lit(h.lr_lambda);
    let tol = T::lit(h.lr_tol);
    let lip = T::lit(0.25) * gram_top_eigenvalue(x) + lambda;
    let step = if lip > T::zero() { T::one() / lip } else { T::one() };
    let mut theta = (vec![T::zero(); d], T::zero());
    let mut y = theta.clone();
    let mut t = T::one();
    for epoch in 0..h.lr_max_epochs {
        let (_, gw, gb) = logistic_loss_grad(x, s, &y.0, y.1, lambda);
        let gnorm = (dot(&gw, &gw) + gb * gb).sqrt();
        if gnorm < tol {
            log::debug!("logistic regression converged after {epoch} epochs");
            return y;
        }
        let next_w: Vec<T> = y.0.iter().zip(&gw).map(|(&a, &g)| a - step * g).collect();
        let next_b = y.1 - step * gb;
        let progress = dot(&gw, &sub(&next_w, &theta.0)) + gb * (next_b - theta.1);
        let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        if progress > T::zero() {
            // momentum points uphill: restart
            t = T::one();
            y = (next_w.clone(), next_b);
        } else {
            let beta = (t - T::one()) / t_next;
            let yw = next_w.iter().zip(&theta.0).map(|(&a, &p)| a + beta * (a - p)).collect();
            y = (yw, next_b + beta * (next_b - theta.1));
            t = t_next;
        }
        theta = (next_w, next_b);
    }
    log::debug!("logistic regression hit the epoch cap of {}", h.lr_max_epochs);
    y
}

fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters) -> LinearModel<T> {
    let fitted: Vec<(Vec<T>, T)> = ovr_positives(data.n_classes)
        .into_par_iter()
        .map(|c| fit_binary(data.x, &signs(data.y, c), h))
        .collect();
    let (weights, bias) = fitted.into_iter().unzip();
    LinearModel { weights, bias }
}
