//! Resolving free-text prompts to catalog prompts by TF-IDF cosine similarity.

mod matcher;
mod tfidf;

pub use matcher::{nearest_known_prompt, LexicalIndex, MatchMethod, MatchProvider, MatchResult, MatchedPrompt, DEFAULT_MIN_SCORE};
pub use tfidf::{cosine, is_stop_word, tokenize, vectorize, CorpusStats, TermVector};
