//! Offline evaluation: rating-error metrics, thresholded top-N retrieval
//! metrics, and k-fold cross-validation over rating records.

mod cv;
mod metrics;
mod split;

use thiserror::Error;

use crate::engine::EngineError;

pub use cv::{
    cross_validate, cross_validate_thresholds, fold_predictions, format_table, report_from_predictions, EvalConfig, EvalReport,
    FoldMetrics, FoldPredictions, Metrics,
};
pub use metrics::{
    f1, mae, precision_recall, query_counts, retrieval_counts, rmse, EmptyConvention, PrecisionBase, PredictionPair, RetrievalCounts,
};
pub use split::{fold_indices, kfold_split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no prediction pairs to score")]
    EmptyInput,
    #[error("{records} records cannot be split into {folds} folds")]
    TooFewRecords { records: usize, folds: usize },
    #[error("fold {fold} has an empty training matrix")]
    EmptyTrain { fold: usize },
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}
