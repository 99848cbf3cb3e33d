//! Linear SVM (hinge loss, L2 penalty) solved by dual coordinate descent.
//! The bias is learned as the weight of a constant unit feature.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::logistic::{dot, LinearModel};
use super::{ovr_positives, signs, Hyperparameters, TrainSet};
use crate::scalar::Scalar;

/// Returns (w, b, final projected-gradient gap).
fn fit_binary<T: Scalar>(x: &[Vec<T>], s: &[T], h: &Hyperparameters, seed: u64) -> (Vec<T>, T, T) {
    let n = x.len();
    let d = x[0].len();
    let c = T::lit(h.svm_c);
    let tol = T::lit(h.svm_tol);
    let qd: Vec<T> = x.iter().map(|r| dot(r, r) + T::one()).collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gap = T::infinity();
    for _ in 0..h.svm_linear_max_epochs {
        order.shuffle(&mut rng);
        let mut pg_max = T::neg_infinity();
        let mut pg_min = T::infinity();
        for &i in &order {
            let g = s[i] * (dot(&w, &x[i]) + b) - T::one();
            let pg = if alpha[i] <= T::zero() {
                g.min(T::zero())
            } else if alpha[i] >= c {
                g.max(T::zero())
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > T::lit(1e-12) {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).max(T::zero()).min(c);
                let delta = (alpha[i] - old) * s[i];
                for (wj, &xj) in w.iter_mut().zip(&x[i]) {
                    *wj = *wj + delta * xj;
                }
                b = b + delta;
            }
        }
        gap = pg_max - pg_min;
        if gap <= tol {
            break;
        }
    }
    if gap > tol {
        log::warn!("linear SVM stopped at the epoch cap with projected-gradient gap {gap}");
    }
    (w, b, gap)
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, h: &Hyperparameters, seed: u64) -> LinearModel<T> {
    let fitted: Vec<(Vec<T>, T)> = ovr_positives(data.n_classes)
        .into_par_iter()
        .map(|c| {
            let (w, b, _) = fit_binary(data.x, &signs(data.y, c), h, seed.wrapping_add(c as u64));
            (w, b)
        })
        .collect();
    let (weights, bias) = fitted.into_iter().unzip();
    LinearModel { weights, bias }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_a_line() {
        let x: Vec<Vec<f64>> = vec![vec![-2.0, 1.0], vec![-1.5, -1.0], vec![1.0, 0.5], vec![2.0, -0.5]];
        let y = [0, 0, 1, 1];
        let m = fit(&TrainSet { x: &x, y: &y, n_classes: 2 }, &Hyperparameters::default(), 0);
        for (r, &c) in x.iter().zip(&y) {
            let s = m.margins(r, 2);
            assert_eq!(usize::from(s[1] > s[0]), c);
        }
    }

    #[test]
    fn converges_within_tolerance() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 / 10.0).sin(), (i as f64 / 7.0).cos()]).collect();
        let s: Vec<f64> = x.iter().map(|r| if r[0] + 0.3 * r[1] > 0.1 { 1.0 } else { -1.0 }).collect();
        let (_, _, gap) = fit_binary(&x, &s, &Hyperparameters::default(), 1);
        assert!(gap <= 1e-3);
    }
}
