use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::PromptId;

use super::EvalError;

/// A held-out rating and the value predicted for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionPair {
    pub context: PromptId,
    pub target: PromptId,
    pub actual: f64,
    pub predicted: f64,
}

pub fn mae(pairs: &[PredictionPair]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(pairs.iter().map(|p| (p.actual - p.predicted).abs()).sum::<f64>() / pairs.len() as f64)
}

pub fn rmse(pairs: &[PredictionPair]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mse = pairs.iter().map(|p| (p.actual - p.predicted).powi(2)).sum::<f64>() / pairs.len() as f64;
    Ok(mse.sqrt())
}

/// Value reported for precision or recall when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyConvention {
    #[default]
    One,
    Zero,
}

impl EmptyConvention {
    fn value(self) -> f64 {
        match self {
            EmptyConvention::One => 1.0,
            EmptyConvention::Zero => 0.0,
        }
    }
}

/// Which top-N entries count as "recommended" in the precision denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecisionBase {
    /// Only entries predicted at or above the threshold.
    #[default]
    Gated,
    /// Every entry of the top-N list.
    AllTopN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RetrievalCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl RetrievalCounts {
    pub fn precision(&self, empty: EmptyConvention) -> f64 {
        ratio(self.tp, self.tp + self.fp, empty)
    }

    pub fn recall(&self, empty: EmptyConvention) -> f64 {
        ratio(self.tp, self.tp + self.fn_, empty)
    }
}

impl std::ops::AddAssign for RetrievalCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

fn ratio(num: u64, den: u64, empty: EmptyConvention) -> f64 {
    if den == 0 {
        empty.value()
    } else {
        num as f64 / den as f64
    }
}

/// Counts for one query context. `held_out` is the context's test pairs;
/// they are ranked by predicted rating (ties by target id) and the first
/// `top_n` form the recommendation list.
///
/// An entry is a true positive when both predicted and actual reach the
/// threshold, and a false positive when only the prediction does. Every
/// relevant held-out pair that is not a true positive is a false negative.
pub fn query_counts(held_out: &[PredictionPair], top_n: usize, threshold: f64, base: PrecisionBase) -> RetrievalCounts {
    let mut ranked: Vec<&PredictionPair> = held_out.iter().collect();
    ranked.sort_by(|a, b| b.predicted.total_cmp(&a.predicted).then(a.target.cmp(&b.target)));
    let mut counts = RetrievalCounts::default();
    for p in ranked.iter().take(top_n) {
        let hit = p.predicted >= threshold;
        let relevant = p.actual >= threshold;
        match (hit, relevant) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, _) if base == PrecisionBase::AllTopN => counts.fp += 1,
            _ => {}
        }
    }
    let relevant = held_out.iter().filter(|p| p.actual >= threshold).count() as u64;
    counts.fn_ = relevant - counts.tp;
    counts
}

/// Micro-averaged retrieval counts over every context present in `pairs`.
pub fn retrieval_counts(pairs: &[PredictionPair], top_n: usize, threshold: f64, base: PrecisionBase) -> Result<RetrievalCounts, EvalError> {
    if top_n < 1 {
        return Err(EvalError::InvalidConfig("top_n must be at least 1".into()));
    }
    let mut by_context: BTreeMap<PromptId, Vec<PredictionPair>> = BTreeMap::new();
    for p in pairs {
        by_context.entry(p.context).or_default().push(*p);
    }
    let mut total = RetrievalCounts::default();
    for held_out in by_context.values() {
        total += query_counts(held_out, top_n, threshold, base);
    }
    Ok(total)
}

/// Counts plus micro-averaged `(precision, recall)`.
pub fn precision_recall(
    pairs: &[PredictionPair],
    top_n: usize,
    threshold: f64,
    base: PrecisionBase,
    empty: EmptyConvention,
) -> Result<(RetrievalCounts, f64, f64), EvalError> {
    let counts = retrieval_counts(pairs, top_n, threshold, base)?;
    Ok((counts, counts.precision(empty), counts.recall(empty)))
}

/// Harmonic mean of precision and recall; zero when both are zero.
pub fn f1(precision: f64, recall: f64) -> f64 {
    let sum = precision + recall;
    if sum == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / sum
    }
}
