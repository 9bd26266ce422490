//! Free-text query → follow-up prompts, with the fallback ladder:
//! exact catalog hit, then lexical nearest prompt, then popular prompts.

use serde::{Deserialize, Serialize};

use crate::data::{DedupPolicy, Invalidation, PromptId, RatingDataset, RatingMatrix, RecordError};
use crate::engine::{fallback_popular, recommend_top_n, EngineConfig, EngineError, Recommendation, SimilarityModel};
use crate::par::Execution;
use crate::text::{LexicalIndex, MatchProvider, MatchResult, DEFAULT_MIN_SCORE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommenderConfig {
    pub engine: EngineConfig,
    pub dedup: DedupPolicy,
    /// Lowest lexical-cosine score accepted as a match.
    pub min_score: f64,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            engine: EngineConfig::default(),
            dedup: DedupPolicy::Mean,
            min_score: DEFAULT_MIN_SCORE,
        }
    }
}

impl RecommenderConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.engine.validate()?;
        if !(0.0..=1.0).contains(&self.min_score) {
            return Err(EngineError::InvalidConfig(format!(
                "min_score {} is outside [0, 1]",
                self.min_score
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendOutcome {
    pub resolved: MatchResult,
    pub items: Vec<Recommendation>,
}

/// An immutable snapshot of matrix, similarity model and text index.
pub struct Recommender<P: MatchProvider = LexicalIndex> {
    config: RecommenderConfig,
    matrix: RatingMatrix,
    model: SimilarityModel,
    index: P,
}

fn model_for(matrix: &RatingMatrix, engine: EngineConfig, execution: Execution) -> Result<SimilarityModel, EngineError> {
    if matrix.is_empty() {
        engine.validate()?;
        Ok(SimilarityModel::empty(engine, matrix.catalog().len()))
    } else {
        SimilarityModel::build(matrix, engine, execution)
    }
}

impl<P: MatchProvider> Recommender<P> {
    pub fn from_dataset(dataset: &RatingDataset, config: RecommenderConfig, execution: Execution) -> Result<Self, EngineError> {
        Self::from_matrix(RatingMatrix::build(dataset, config.dedup), config, execution)
    }

    pub fn from_matrix(matrix: RatingMatrix, config: RecommenderConfig, execution: Execution) -> Result<Self, EngineError> {
        config.validate()?;
        let model = model_for(&matrix, config.engine, execution)?;
        let index = P::build(matrix.catalog());
        Ok(Recommender {
            config,
            matrix,
            model,
            index,
        })
    }

    pub fn config(&self) -> &RecommenderConfig {
        &self.config
    }

    pub fn matrix(&self) -> &RatingMatrix {
        &self.matrix
    }

    pub fn model(&self) -> &SimilarityModel {
        &self.model
    }

    pub fn resolve(&self, query: &str) -> MatchResult {
        self.index.resolve(query, self.config.min_score)
    }

    /// Popular prompts, relaxing the received-count floor to one rating if
    /// nothing clears the configured floor.
    pub fn popular(&self, n: usize) -> Result<Vec<Recommendation>, EngineError> {
        let list = fallback_popular(&self.matrix, n, self.config.engine.min_received)?;
        if list.is_empty() && self.config.engine.min_received > 1 {
            return fallback_popular(&self.matrix, n, 1);
        }
        Ok(list)
    }

    /// Top-`n` follow-ups for a known prompt.
    pub fn recommend_for(&self, context: PromptId, n: usize, threshold: Option<f64>) -> Result<Vec<Recommendation>, EngineError> {
        recommend_top_n(&self.model, &self.matrix, context, n, threshold)
    }

    /// Resolves `query` and recommends from the matched prompt, or returns
    /// popular prompts when nothing matches.
    pub fn recommend(&self, query: &str, n: usize, threshold: Option<f64>) -> Result<RecommendOutcome, EngineError> {
        let resolved = self.resolve(query);
        let items = match resolved.id() {
            Some(id) => self.recommend_for(id, n, threshold)?,
            None => {
                let mut items = self.popular(n)?;
                if let Some(t) = threshold {
                    items.retain(|r| r.predicted >= t);
                    for (i, r) in items.iter_mut().enumerate() {
                        r.rank = i + 1;
                    }
                }
                items
            }
        };
        Ok(RecommendOutcome { resolved, items })
    }

    /// Prompts in id order whose text contains `filter`, case-insensitively.
    pub fn prompts(&self, filter: Option<&str>) -> Vec<(PromptId, String)> {
        let needle = filter.map(str::to_lowercase).filter(|f| !f.is_empty());
        self.matrix
            .catalog()
            .iter()
            .filter(|p| needle.as_ref().is_none_or(|n| p.text.to_lowercase().contains(n.as_str())))
            .map(|p| (p.id, p.text.clone()))
            .collect()
    }

    /// A new snapshot with one more observation. Stale similarities are
    /// recomputed and the text index is rebuilt when the catalog grew.
    pub fn with_rating(
        &self,
        context: &str,
        target: &str,
        rating: f64,
        execution: Execution,
    ) -> Result<(Self, Invalidation), RatingUpdateError> {
        let mut matrix = self.matrix.clone();
        let invalidation = matrix.add_rating(context, target, rating)?;
        let model = self.model.refresh(&matrix, &invalidation, execution)?;
        let index = P::build(matrix.catalog());
        Ok((
            Recommender {
                config: self.config,
                matrix,
                model,
                index,
            },
            invalidation,
        ))
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RatingUpdateError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
