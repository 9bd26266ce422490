use std::cmp::Ordering;
use std::collections::btree_map;

use crate::data::{PromptId, RatingMatrix};

use super::EngineError;

/// Centered sums of squares at or below this count as zero variance.
pub const ZERO_VARIANCE: f64 = 1e-12;

/// Stored similarities are rounded to this grid so that coefficients which
/// are mathematically equal (often exactly ±1 on two co-raters) compare
/// equal and neighbor ties break on id.
pub const SIMILARITY_GRID: f64 = 1e-12;

pub fn snap_similarity(s: f64) -> f64 {
    ((s / SIMILARITY_GRID).round() * SIMILARITY_GRID).clamp(-1.0, 1.0)
}

/// Pearson coefficient with the size of the co-rater set it was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSimilarity {
    pub similarity: f64,
    pub support: usize,
}

fn check(matrix: &RatingMatrix, id: PromptId) -> Result<(), EngineError> {
    if matrix.catalog().contains(id) {
        Ok(())
    } else {
        Err(EngineError::UnknownPrompt(id))
    }
}

/// Walks two sorted columns in lockstep, yielding `(context, rating_a, rating_b)`
/// for every context that rated both.
pub(crate) struct CoRated<'a> {
    a: btree_map::Iter<'a, PromptId, f64>,
    b: btree_map::Iter<'a, PromptId, f64>,
}

impl<'a> CoRated<'a> {
    pub(crate) fn new(matrix: &'a RatingMatrix, a: PromptId, b: PromptId) -> Self {
        CoRated {
            a: matrix.column(a).iter(),
            b: matrix.column(b).iter(),
        }
    }
}

impl Iterator for CoRated<'_> {
    type Item = (PromptId, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let (mut ka, mut va) = self.a.next()?;
        let (mut kb, mut vb) = self.b.next()?;
        loop {
            match ka.cmp(kb) {
                Ordering::Equal => return Some((*ka, *va, *vb)),
                Ordering::Less => (ka, va) = self.a.next()?,
                Ordering::Greater => (kb, vb) = self.b.next()?,
            }
        }
    }
}

/// Contexts that rated both `a` and `b`, in id order.
pub fn co_raters(a: PromptId, b: PromptId, matrix: &RatingMatrix) -> Result<Vec<PromptId>, EngineError> {
    check(matrix, a)?;
    check(matrix, b)?;
    Ok(CoRated::new(matrix, a, b).map(|(p, _, _)| p).collect())
}

/// Pearson correlation of two paired rating vectors, centered on their own
/// means. `None` when fewer than two pairs or either side has zero variance.
///
/// The raw coefficient is returned unclamped.
pub fn correlation(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    let (sum_a, sum_b) = pairs.iter().fold((0.0, 0.0), |(sa, sb), &(a, b)| (sa + a, sb + b));
    let (mean_a, mean_b) = (sum_a / n as f64, sum_b / n as f64);
    let (mut cross, mut ss_a, mut ss_b) = (0.0, 0.0, 0.0);
    for &(a, b) in pairs {
        let (da, db) = (a - mean_a, b - mean_b);
        cross += da * db;
        ss_a += da * da;
        ss_b += db * db;
    }
    if ss_a <= ZERO_VARIANCE || ss_b <= ZERO_VARIANCE {
        return None;
    }
    Some(cross / (ss_a * ss_b).sqrt())
}

pub(crate) fn pair_similarity(matrix: &RatingMatrix, a: PromptId, b: PromptId, min_support: usize) -> Option<PairSimilarity> {
    let pairs: Vec<(f64, f64)> = CoRated::new(matrix, a, b).map(|(_, x, y)| (x, y)).collect();
    if pairs.len() < min_support {
        return None;
    }
    correlation(&pairs).map(|s| PairSimilarity {
        similarity: snap_similarity(s),
        support: pairs.len(),
    })
}

/// Similarity of prompts `a` and `b` over the contexts that rated both,
/// clamped to `[-1, 1]` and snapped to [`SIMILARITY_GRID`]. `Ok(None)` marks an undefined similarity: too few
/// co-raters or zero variance on either side.
pub fn pearson(a: PromptId, b: PromptId, matrix: &RatingMatrix, min_support: usize) -> Result<Option<f64>, EngineError> {
    check(matrix, a)?;
    check(matrix, b)?;
    if a == b {
        return Err(EngineError::SamePrompt(a));
    }
    Ok(pair_similarity(matrix, a, b, min_support.max(2)).map(|p| p.similarity))
}
