//! Prompt-pair rating data: catalog, CSV ingestion, sparse matrix, and the
//! synthetic generator.

mod catalog;
mod dataset;
mod generator;
mod matrix;

pub use catalog::{normalize, Prompt, PromptCatalog, PromptId};
pub use dataset::{
    append_record, load_dataset, read_dataset, round_rating, save_dataset, validate_rating, write_dataset, DataError, RatingDataset,
    RatingRecord, RecordError, CSV_HEADER, MAX_RATING, MIN_RATING,
};
pub use generator::{generate_dataset, generate_prompts, theme_names, GeneratedPrompt, GeneratorConfig};
pub use matrix::{Cell, DedupPolicy, Invalidation, RatingMatrix, MIDPOINT_RATING};

/// Convenience wrapper over [`RatingMatrix::build`].
pub fn build_matrix(dataset: &RatingDataset, policy: DedupPolicy) -> RatingMatrix {
    RatingMatrix::build(dataset, policy)
}
