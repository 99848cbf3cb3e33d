use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, FeatureTable};
use crate::label::AttackClass;
use crate::scalar::Scalar;

/// Stratified, seeded train/test partition of row indices.
///
/// The train size is `round(train_fraction * n)`. Per-class train counts are
/// apportioned by largest remainder so each class keeps its proportion to
/// within one row. Returned indices are sorted ascending.
pub fn holdout_indices(
    classes: &[AttackClass],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DatasetError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DatasetError::InvalidFraction(train_fraction));
    }
    let mut by_class: BTreeMap<AttackClass, Vec<usize>> = BTreeMap::new();
    for (i, c) in classes.iter().enumerate() {
        by_class.entry(*c).or_default().push(i);
    }
    if let Some((c, rows)) = by_class.iter().find(|(_, rows)| rows.len() < 2) {
        return Err(DatasetError::DegenerateSplit { class: c.to_string(), rows: rows.len() });
    }
    let n = classes.len();
    let target = (train_fraction * n as f64).round() as usize;

    let mut quota: Vec<(AttackClass, usize, f64)> = by_class
        .iter()
        .map(|(c, rows)| {
            let exact = train_fraction * rows.len() as f64;
            (*c, exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut assigned: usize = quota.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    // largest remainder first; class order breaks ties
    order.sort_by(|&a, &b| quota[b].2.partial_cmp(&quota[a].2).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(order.len() * 2) {
        if assigned >= target {
            break;
        }
        if quota[i].1 < by_class[&quota[i].0].len() {
            quota[i].1 += 1;
            assigned += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    for (c, k, _) in quota {
        let mut rows = by_class[&c].clone();
        rows.shuffle(&mut rng);
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_holdout<T: Scalar>(
    t: &FeatureTable<T>,
    train_fraction: f64,
    seed: u64,
) -> Result<(FeatureTable<T>, FeatureTable<T>), DatasetError> {
    let (train, test) = holdout_indices(t.classes(), train_fraction, seed)?;
    Ok((t.select_rows(&train), t.select_rows(&test)))
}
