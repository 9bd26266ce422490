use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::RatingDataset;

use super::EvalError;

/// Test-set record indices for each fold: records are shuffled with a
/// seeded generator and dealt round-robin, so fold sizes differ by at most one.
pub fn fold_indices(n_records: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if folds < 2 {
        return Err(EvalError::InvalidConfig("folds must be at least 2".into()));
    }
    if n_records < folds {
        return Err(EvalError::TooFewRecords { records: n_records, folds });
    }
    let mut order: Vec<usize> = (0..n_records).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::with_capacity(n_records / folds + 1); folds];
    for (i, idx) in order.into_iter().enumerate() {
        out[i % folds].push(idx);
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    Ok(out)
}

/// Train indices complementing `test` (sorted) within `0..n_records`.
pub(crate) fn complement(n_records: usize, test: &[usize]) -> Vec<usize> {
    let mut train = Vec::with_capacity(n_records - test.len());
    let mut it = test.iter().peekable();
    for i in 0..n_records {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            train.push(i);
        }
    }
    train
}

/// `(train, test)` partitions of the dataset's records. Both sides keep the
/// full catalog.
pub fn kfold_split(dataset: &RatingDataset, folds: usize, seed: u64) -> Result<Vec<(RatingDataset, RatingDataset)>, EvalError> {
    let n = dataset.len();
    Ok(fold_indices(n, folds, seed)?
        .into_iter()
        .map(|test| (dataset.subset(&complement(n, &test)), dataset.subset(&test)))
        .collect())
}
