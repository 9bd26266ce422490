use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{PromptId, RatingMatrix, MAX_RATING, MIN_RATING};

use super::model::{PredictionRule, SimilarityModel};
use super::EngineError;

/// Which rule produced a predicted rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Knn,
    ItemMean,
    GlobalMean,
    PopularFallback,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Knn => "knn",
            Provenance::ItemMean => "item-mean",
            Provenance::GlobalMean => "global-mean",
            Provenance::PopularFallback => "popular-fallback",
        }
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub target: PromptId,
    pub text: String,
    pub predicted: f64,
    /// 1-based position in its list.
    pub rank: usize,
    pub provenance: Provenance,
    pub neighbor_count: usize,
}

/// Predicted rating for one `(context, target)` pair before it is placed in
/// a list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub predicted: f64,
    pub provenance: Provenance,
    pub neighbor_count: usize,
}

fn clamp_rating(x: f64) -> f64 {
    x.clamp(MIN_RATING, MAX_RATING)
}

/// Predicts how `context` would rate `target`.
///
/// The neighborhood is the `k_neighbors` most similar prompts to `target`
/// that `context` has rated and whose similarity is positive. An empty
/// neighborhood falls back to the target's mean received rating, then to
/// the global mean.
pub fn predict_rating(
    model: &SimilarityModel,
    matrix: &RatingMatrix,
    context: PromptId,
    target: PromptId,
) -> Result<Prediction, EngineError> {
    for id in [context, target] {
        if !matrix.catalog().contains(id) {
            return Err(EngineError::UnknownPrompt(id));
        }
    }
    let config = model.config();
    let neighborhood: Vec<(PromptId, f64, f64)> = model
        .neighbors(target)
        .iter()
        .take_while(|(_, sim)| *sim > 0.0)
        .filter_map(|&(j, sim)| matrix.rating(context, j).map(|r| (j, sim, r)))
        .take(config.k_neighbors)
        .collect();

    if !neighborhood.is_empty() {
        let weight: f64 = neighborhood.iter().map(|(_, s, _)| s).sum();
        let raw = match config.rule {
            PredictionRule::WeightedAverage => neighborhood.iter().map(|(_, s, r)| s * r).sum::<f64>() / weight,
            PredictionRule::MeanCentered => {
                let base = matrix.received_mean(target).unwrap_or_else(|| matrix.global_mean_or_midpoint());
                let offset: f64 = neighborhood
                    .iter()
                    .map(|&(j, s, r)| s * (r - matrix.received_mean(j).expect("neighbor has ratings")))
                    .sum();
                base + offset / weight
            }
        };
        return Ok(Prediction {
            predicted: clamp_rating(raw),
            provenance: Provenance::Knn,
            neighbor_count: neighborhood.len(),
        });
    }
    Ok(match matrix.received_mean(target) {
        Some(mean) => Prediction {
            predicted: clamp_rating(mean),
            provenance: Provenance::ItemMean,
            neighbor_count: 0,
        },
        None => Prediction {
            predicted: clamp_rating(matrix.global_mean_or_midpoint()),
            provenance: Provenance::GlobalMean,
            neighbor_count: 0,
        },
    })
}

/// [`predict_rating`] wrapped as a single-item recommendation.
pub fn predict(model: &SimilarityModel, matrix: &RatingMatrix, context: PromptId, target: PromptId) -> Result<Recommendation, EngineError> {
    let p = predict_rating(model, matrix, context, target)?;
    Ok(Recommendation {
        target,
        text: matrix.catalog().text(target).to_owned(),
        predicted: p.predicted,
        rank: 1,
        provenance: p.provenance,
        neighbor_count: p.neighbor_count,
    })
}

/// Orders by predicted rating descending, then normalized text ascending.
fn rank_order(matrix: &RatingMatrix) -> impl Fn(&Recommendation, &Recommendation) -> Ordering + '_ {
    let catalog = matrix.catalog();
    move |a, b| {
        b.predicted
            .total_cmp(&a.predicted)
            .then_with(|| catalog.key(a.target).cmp(catalog.key(b.target)))
            .then(a.target.cmp(&b.target))
    }
}

fn assign_ranks(list: &mut [Recommendation]) {
    for (i, rec) in list.iter_mut().enumerate() {
        rec.rank = i + 1;
    }
}

/// Top-`n` follow-up prompts for `context`.
///
/// Every catalog prompt other than the context is a candidate, minus the
/// ones the context already rated unless `include_rated` is set. The list is
/// truncated to `n` first and then entries predicted below `threshold` are
/// dropped. A context outside the catalog gets the popularity fallback.
pub fn recommend_top_n(
    model: &SimilarityModel,
    matrix: &RatingMatrix,
    context: PromptId,
    n: usize,
    threshold: Option<f64>,
) -> Result<Vec<Recommendation>, EngineError> {
    if n < 1 {
        return Err(EngineError::InvalidConfig("n must be at least 1".into()));
    }
    if !matrix.catalog().contains(context) {
        let mut list = fallback_popular(matrix, n, model.config().min_received)?;
        if let Some(t) = threshold {
            list.retain(|r| r.predicted >= t);
            assign_ranks(&mut list);
        }
        return Ok(list);
    }
    let include_rated = model.config().include_rated;
    let mut list = Vec::new();
    for target in matrix.catalog().ids() {
        if target == context || (!include_rated && matrix.has_rated(context, target)) {
            continue;
        }
        list.push(predict(model, matrix, context, target)?);
    }
    list.sort_by(rank_order(matrix));
    list.truncate(n);
    if let Some(t) = threshold {
        list.retain(|r| r.predicted >= t);
    }
    assign_ranks(&mut list);
    Ok(list)
}

/// Prompts ranked by mean received rating, restricted to those with at
/// least `min_received` ratings.
pub fn fallback_popular(matrix: &RatingMatrix, n: usize, min_received: usize) -> Result<Vec<Recommendation>, EngineError> {
    if n < 1 {
        return Err(EngineError::InvalidConfig("n must be at least 1".into()));
    }
    let mut list: Vec<Recommendation> = matrix
        .rated_targets()
        .filter(|&id| matrix.column(id).len() >= min_received)
        .map(|id| Recommendation {
            target: id,
            text: matrix.catalog().text(id).to_owned(),
            predicted: clamp_rating(matrix.received_mean(id).expect("rated target")),
            rank: 0,
            provenance: Provenance::PopularFallback,
            neighbor_count: 0,
        })
        .collect();
    list.sort_by(rank_order(matrix));
    list.truncate(n);
    assign_ranks(&mut list);
    Ok(list)
}
