//! Item-item collaborative filtering over the prompt rating matrix.
//!
//! Prompts play both roles: the context prompt of a row acts as the rater,
//! and the targets it rated are the items. Two prompts are similar when the
//! contexts that rated both rated them in a correlated way.

mod model;
mod pearson;
mod predict;

use thiserror::Error;

use crate::data::PromptId;

pub use model::{build_similarity_model, EngineConfig, PredictionRule, SimilarityModel};
pub use pearson::{co_raters, correlation, pearson, snap_similarity, PairSimilarity, SIMILARITY_GRID, ZERO_VARIANCE};
pub use predict::{fallback_popular, predict, predict_rating, recommend_top_n, Prediction, Provenance, Recommendation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("unknown prompt {0}")]
    UnknownPrompt(PromptId),
    #[error("similarity of prompt {0} with itself is not defined")]
    SamePrompt(PromptId),
    #[error("rating matrix is empty")]
    EmptyMatrix,
    #[error("{0}")]
    InvalidConfig(String),
}
