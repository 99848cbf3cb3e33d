//! CART decision tree with Gini impurity.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, Hyperparameters, MaxFeatures, TrainSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase", bound = "T: Scalar")]
pub enum Node<T> {
    Leaf {
        /// Class frequencies of the training rows reaching this leaf.
        distribution: Vec<T>,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: T,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecisionTree<T> {
    /// Node 0 is the root.
    pub nodes: Vec<Node<T>>,
}

/// A candidate split and the weighted Gini impurity of its children.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    pub impurity: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeConfig {
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// Features examined per split; the full width means no sampling.
    pub max_features: usize,
}

impl TreeConfig {
    pub fn from_hyper(h: &Hyperparameters, d: usize) -> Self {
        TreeConfig { min_samples_split: h.dt_min_samples_split, max_depth: h.dt_max_depth, max_features: d }
    }

    pub fn for_forest(h: &Hyperparameters, d: usize, max_features: MaxFeatures) -> Self {
        TreeConfig { max_features: max_features.resolve(d), ..Self::from_hyper(h, d) }
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Midpoint of adjacent distinct values `a < b`, kept in `[a, b)`.
fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let m = a + (b - a) / T::lit(2.0);
    if m >= b || m < a { a } else { m }
}

/// Lowest weighted-Gini split over `features` for the given rows. Ties keep
/// the earliest feature, then the lowest threshold. `None` when every listed
/// feature is constant over `rows`.
pub fn best_split<T: Scalar>(
    x: &[Vec<T>],
    y: &[usize],
    n_classes: usize,
    rows: &[usize],
    features: &[usize],
) -> Option<Split<T>> {
    let n = rows.len();
    let mut total = vec![0usize; n_classes];
    for &r in rows {
        total[y[r]] += 1;
    }
    let mut best: Option<Split<T>> = None;
    let mut order = rows.to_vec();
    for &f in features {
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap_or(Ordering::Equal));
        let mut left = vec![0usize; n_classes];
        for i in 0..n.saturating_sub(1) {
            left[y[order[i]]] += 1;
            let (a, b) = (x[order[i]][f], x[order[i + 1]][f]);
            // equal or NaN neighbours give no threshold
            if a.partial_cmp(&b) != Some(Ordering::Less) {
                continue;
            }
            let nl = i + 1;
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let imp = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            if best.is_none_or(|s| imp < s.impurity) {
                best = Some(Split { feature: f, threshold: midpoint(a, b), impurity: imp });
            }
        }
    }
    best
}

impl<T: Scalar> DecisionTree<T> {
    pub fn leaf(&self, row: &[T]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn distribution(&self, row: &[T]) -> &[T] {
        match &self.nodes[self.leaf(row)] {
            Node::Leaf { distribution } => distribution,
            Node::Split { .. } => unreachable!("leaf() stops at a leaf"),
        }
    }

    pub fn predict(&self, row: &[T]) -> usize {
        argmax(self.distribution(row))
    }

    /// Root split as (feature, threshold); `None` for a single-leaf tree.
    pub fn root_split(&self) -> Option<(usize, T)> {
        match &self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Grows a tree on `rows` (duplicates allowed, as in a bootstrap sample).
pub(crate) fn grow<T: Scalar>(data: &TrainSet<'_, T>, rows: Vec<usize>, cfg: &TreeConfig, rng: &mut ChaCha8Rng) -> DecisionTree<T> {
    let d = data.n_features();
    let k = data.n_classes;
    let mut nodes: Vec<Node<T>> = vec![Node::Leaf { distribution: Vec::new() }];
    let mut stack = vec![(0usize, rows, 0usize)];
    let all: Vec<usize> = (0..d).collect();
    while let Some((id, rows, depth)) = stack.pop() {
        let mut counts = vec![0usize; k];
        for &r in &rows {
            counts[data.y[r]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let capped = cfg.max_depth.is_some_and(|m| depth >= m);
        let split = if pure || capped || rows.len() < cfg.min_samples_split {
            None
        } else if cfg.max_features >= d {
            best_split(data.x, data.y, k, &rows, &all)
        } else {
            let mut feats = all.clone();
            feats.shuffle(rng);
            let (head, tail) = feats.split_at_mut(cfg.max_features);
            head.sort_unstable();
            best_split(data.x, data.y, k, &rows, head).or_else(|| {
                tail.sort_unstable();
                best_split(data.x, data.y, k, &rows, tail)
            })
        };
        match split {
            None => {
                let n = T::from_usize_lossy(rows.len());
                nodes[id] = Node::Leaf { distribution: counts.iter().map(|&c| T::from_usize_lossy(c) / n).collect() };
            }
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| data.x[i][s.feature] <= s.threshold);
                let (li, ri) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf { distribution: Vec::new() });
                nodes.push(Node::Leaf { distribution: Vec::new() });
                nodes[id] = Node::Split { feature: s.feature, threshold: s.threshold, left: li, right: ri };
                stack.push((ri, r, depth + 1));
                stack.push((li, l, depth + 1));
            }
        }
    }
    DecisionTree { nodes }
}

pub(crate) fn fit<T: Scalar>(data: &TrainSet<'_, T>, cfg: &TreeConfig, seed: u64) -> DecisionTree<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grow(data, (0..data.x.len()).collect(), cfg, &mut rng)
}
