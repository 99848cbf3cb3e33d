//! RBF-kernel SVM trained with SMO (second-order working-set selection),
//! reduced to one-vs-rest for more than two classes.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ovr_positives, ovr_scores, signs, Hyperparameters, TrainSet};
use crate::scalar::Scalar;

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RbfMachine<T> {
    pub support: Vec<Vec<T>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<T>,
    pub rho: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RbfModel<T> {
    pub gamma: T,
    pub machines: Vec<RbfMachine<T>>,
}

/// Outcome of one SMO solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoReport {
    pub iterations: usize,
    /// Maximal KKT violation of the last working set, m(alpha) - M(alpha).
    pub gap: f64,
    pub converged: bool,
}

pub(crate) fn rbf<T: Scalar>(a: &[T], b: &[T], gamma: T) -> T {
    let d2 = a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q));
    (-gamma * d2).exp()
}

impl<T: Scalar> RbfMachine<T> {
    pub fn decision(&self, row: &[T], gamma: T) -> T {
        self.support.iter().zip(&self.coef).fold(T::zero(), |acc, (sv, &c)| acc + c * rbf(sv, row, gamma)) - self.rho
    }
}

impl<T: Scalar> RbfModel<T> {
    pub fn margins(&self, row: &[T], n_classes: usize) -> Vec<T> {
        ovr_scores(self.machines.iter().map(|m| m.decision(row, self.gamma)).collect(), n_classes)
    }
}

/// Least-recently-used cache of kernel rows.
struct KernelCache<'a, T> {
    x: &'a [Vec<T>],
    gamma: T,
    rows: Vec<Option<Arc<[T]>>>,
    stamp: Vec<u64>,
    cached: Vec<usize>,
    capacity: usize,
    clock: u64,
}

impl<'a, T: Scalar> KernelCache<'a, T> {
    fn new(x: &'a [Vec<T>], gamma: T) -> Self {
        let n = x.len();
        let capacity = (CACHE_BYTES / (n.max(1) * std::mem::size_of::<T>())).clamp(2, n.max(2));
        KernelCache { x, gamma, rows: vec![None; n], stamp: vec![0; n], cached: Vec::new(), capacity, clock: 0 }
    }

    fn row(&mut self, i: usize) -> Arc<[T]> {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return r.clone();
        }
        if self.cached.len() >= self.capacity {
            let (pos, _) = self
                .cached
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != i)
                .min_by_key(|(_, &c)| self.stamp[c])
                .expect("capacity is at least two");
            let victim = self.cached.swap_remove(pos);
            self.rows[victim] = None;
        }
        let xi = &self.x[i];
        let r: Arc<[T]> = self.x.iter().map(|xj| rbf(xi, xj, self.gamma)).collect();
        self.rows[i] = Some(r.clone());
        self.cached.push(i);
        r
    }
}

/// Dual solution of one binary problem with targets `s` in {-1, +1}.
#[derive(Debug, Clone)]
pub struct SmoSolution<T> {
    pub alpha: Vec<T>,
    pub rho: T,
    pub report: SmoReport,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `0 <= a <= c`, `s'a = 0`, with
/// `Q_ij = s_i s_j K(x_i, x_j)`, stopping when the maximal KKT violation
/// drops below `tol`.
pub fn smo_binary<T: Scalar>(x: &[Vec<T>], s: &[T], gamma: T, c: T, tol: T, max_iter: usize) -> SmoSolution<T> {
    let n = x.len();
    let zero = T::zero();
    let tau = T::lit(TAU);
    let mut cache = KernelCache::new(x, gamma);
    let mut alpha = vec![zero; n];
    let mut g = vec![-T::one(); n];
    let up = |a: T| a >= c;
    let low = |a: T| a <= zero;
    let mut iterations = 0;
    let mut gap = T::infinity();
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = T::neg_infinity();
        let mut pick_i = None;
        for t in 0..n {
            if s[t] > zero {
                if !up(alpha[t]) && -g[t] >= gmax {
                    gmax = -g[t];
                    pick_i = Some(t);
                }
            } else if !low(alpha[t]) && g[t] >= gmax {
                gmax = g[t];
                pick_i = Some(t);
            }
        }
        let Some(i) = pick_i else {
            gap = zero;
            converged = true;
            break;
        };
        let ki = cache.row(i);
        let mut gmax2 = T::neg_infinity();
        let mut pick_j = None;
        let mut obj_min = T::infinity();
        for t in 0..n {
            let (eligible, gd, v) = if s[t] > zero {
                (!low(alpha[t]), gmax + g[t], g[t])
            } else {
                (!up(alpha[t]), gmax - g[t], -g[t])
            };
            if !eligible {
                continue;
            }
            gmax2 = gmax2.max(v);
            if gd > zero {
                let quad = T::one() + T::one() - T::lit(2.0) * ki[t];
                let quad = if quad > zero { quad } else { tau };
                let obj = -(gd * gd) / quad;
                if obj <= obj_min {
                    obj_min = obj;
                    pick_j = Some(t);
                }
            }
        }
        gap = gmax + gmax2;
        let Some(j) = pick_j.filter(|_| gap >= tol) else {
            converged = true;
            break;
        };
        iterations += 1;
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = T::lit(2.0) - T::lit(2.0) * ki[j];
        let quad = if quad > zero { quad } else { tau };
        if s[i] != s[j] {
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > zero {
                if alpha[j] < zero {
                    alpha[j] = zero;
                    alpha[i] = diff;
                }
            } else if alpha[i] < zero {
                alpha[i] = zero;
                alpha[j] = -diff;
            }
            if diff > zero {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < zero {
                alpha[j] = zero;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < zero {
                alpha[i] = zero;
                alpha[j] = sum;
            }
        }
        let di = (alpha[i] - old_i) * s[i];
        let dj = (alpha[j] - old_j) * s[j];
        for t in 0..n {
            g[t] = g[t] + s[t] * (ki[t] * di + kj[t] * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped at the iteration cap ({max_iter}) with KKT gap {gap}");
    }
    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (T::infinity(), T::neg_infinity());
    let (mut n_free, mut sum_free) = (0usize, zero);
    for t in 0..n {
        let yg = s[t] * g[t];
        if up(alpha[t]) {
            if s[t] < zero { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if low(alpha[t]) {
            if s[t] > zero { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free = sum_free + yg;
        }
    }
    let rho = if n_free > 0 { sum_free / T::from_usize_lossy(n_free) } else { (ub + lb) / T::lit(2.0) };
    SmoSolution { alpha, rho, report: SmoReport { iterations, gap: gap.as_f64(), converged } }
}

/// Default kernel width: 1 / (d * mean feature variance).
pub fn auto_gamma<T: Scalar>(x: &[Vec<T>]) -> T {
    let d = x[0].len().max(1);
    let n = T::from_usize_lossy(x.len());
    let mut total = T::zero();
    for f in 0..x[0].len() {
        let mean = x.iter().map(|r| r[f]).sum::<T>() / n;
        total = total + x.iter().map(|r| (r[f] - mean) * (r[f] - mean)).sum::<T>() / n;
    }
    let mean_var = total / T::from_usize_lossy(d);
    let mean_var = if mean_var > T::zero() { mean_var } else { T::one() };
    T::one() / (T::from_usize_lossy(d) * mean_var)
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters) -> RbfModel<T> {
    let gamma = h.svm_gamma.map(T::lit).unwrap_or_else(|| auto_gamma(data.x));
    let c = T::lit(h.svm_c);
    let tol = T::lit(h.svm_tol);
    let max_iter = h.svm_max_iter.unwrap_or_else(|| (100 * data.x.len()).max(10_000_000));
    let machines = ovr_positives(data.n_classes)
        .into_par_iter()
        .map(|pos| {
            let s = signs(data.y, pos);
            let sol = smo_binary(data.x, &s, gamma, c, tol, max_iter);
            log::debug!("SMO for class {pos}: {:?}", sol.report);
            let (support, coef) = sol
                .alpha
                .iter()
                .zip(&s)
                .zip(data.x)
                .filter(|((&a, _), _)| a > T::zero())
                .map(|((&a, &si), r)| (r.clone(), a * si))
                .unzip();
            RbfMachine { support, coef, rho: sol.rho }
        })
        .collect();
    RbfModel { gamma, machines }
}
