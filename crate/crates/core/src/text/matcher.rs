use serde::Serialize;

use crate::data::{normalize, PromptCatalog, PromptId};

use super::tfidf::{cosine, vectorize, CorpusStats, TermVector};

/// Lexical-cosine scores below this are treated as no match.
pub const DEFAULT_MIN_SCORE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMethod {
    Exact,
    LexicalCosine,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPrompt {
    pub id: PromptId,
    pub text: String,
}

/// How a free-text query was resolved against the catalog.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub matched: Option<MatchedPrompt>,
    pub score: f64,
    pub method: MatchMethod,
}

impl MatchResult {
    pub fn none(score: f64) -> Self {
        MatchResult {
            matched: None,
            score,
            method: MatchMethod::None,
        }
    }

    pub fn id(&self) -> Option<PromptId> {
        self.matched.as_ref().map(|m| m.id)
    }
}

/// Resolves free text to a known prompt. Implementations are built from a
/// catalog snapshot and are immutable afterwards.
///
/// Contract: an exact normalized-text hit wins with score 1; otherwise the
/// result is the argmax of the provider's own score over the catalog, kept
/// only if it reaches `min_score`.
pub trait MatchProvider: Send + Sync {
    fn build(catalog: &PromptCatalog) -> Self
    where
        Self: Sized;

    fn resolve(&self, query: &str, min_score: f64) -> MatchResult;
}

struct Entry {
    id: PromptId,
    text: String,
    key: String,
    vector: TermVector,
}

/// TF-IDF index over the catalog's prompt texts.
pub struct LexicalIndex {
    stats: CorpusStats,
    entries: Vec<Entry>,
}

impl LexicalIndex {
    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cosine score of `query` against every prompt, in catalog order.
    pub fn scores(&self, query: &str) -> Vec<(PromptId, f64)> {
        let q = vectorize(query, &self.stats);
        self.entries.iter().map(|e| (e.id, cosine(&q, &e.vector))).collect()
    }
}

impl MatchProvider for LexicalIndex {
    fn build(catalog: &PromptCatalog) -> Self {
        let stats = CorpusStats::from_documents(catalog.iter().map(|p| p.text.as_str()));
        let entries = catalog
            .iter()
            .map(|p| Entry {
                id: p.id,
                text: p.text.clone(),
                key: p.key().to_owned(),
                vector: vectorize(&p.text, &stats),
            })
            .collect();
        LexicalIndex { stats, entries }
    }

    fn resolve(&self, query: &str, min_score: f64) -> MatchResult {
        let key = normalize(query);
        if key.is_empty() || self.entries.is_empty() {
            return MatchResult::none(0.0);
        }
        if let Some(e) = self.entries.iter().find(|e| e.key == key) {
            return MatchResult {
                matched: Some(MatchedPrompt {
                    id: e.id,
                    text: e.text.clone(),
                }),
                score: 1.0,
                method: MatchMethod::Exact,
            };
        }
        let q = vectorize(query, &self.stats);
        let best = self
            .entries
            .iter()
            .map(|e| (e, cosine(&q, &e.vector)))
            .max_by(|(a, sa), (b, sb)| sa.total_cmp(sb).then_with(|| b.key.cmp(&a.key)));
        match best {
            Some((e, score)) if score > 0.0 && score >= min_score => MatchResult {
                matched: Some(MatchedPrompt {
                    id: e.id,
                    text: e.text.clone(),
                }),
                score,
                method: MatchMethod::LexicalCosine,
            },
            Some((_, score)) => MatchResult::none(score),
            None => MatchResult::none(0.0),
        }
    }
}

/// One-shot resolution with the lexical provider.
pub fn nearest_known_prompt(text: &str, catalog: &PromptCatalog, min_score: f64) -> MatchResult {
    LexicalIndex::build(catalog).resolve(text, min_score)
}
