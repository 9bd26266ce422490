//! Follow-up prompt recommendation with item-item Pearson collaborative
//! filtering.
//!
//! Ratings are directed prompt pairs: a context prompt rates a target prompt
//! on a 1 to 5 scale. The [`engine`] treats context prompts as raters and
//! target prompts as items, computes Pearson similarities between targets
//! over their shared raters, and ranks unseen targets for a context by
//! k-NN weighted prediction. Queries that do not match a known prompt are
//! resolved through [`text`] and, failing that, answered with popular
//! prompts. [`eval`] runs k-fold cross-validation with MAE, RMSE and
//! thresholded top-N precision/recall/F1.
//!
//! The all-pairs similarity build and the per-fold evaluation loop run on
//! rayon when the `parallel` feature (default) is enabled; see [`par`].

pub mod data;
pub mod engine;
pub mod eval;
pub mod par;
pub mod recommender;
pub mod text;

pub use data::{DedupPolicy, PromptCatalog, PromptId, RatingDataset, RatingMatrix, RatingRecord};
pub use engine::{EngineConfig, Provenance, Recommendation, SimilarityModel};
pub use eval::{EvalConfig, EvalReport};
pub use par::Execution;
pub use recommender::{RecommendOutcome, Recommender, RecommenderConfig};
