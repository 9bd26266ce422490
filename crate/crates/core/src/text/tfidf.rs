use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use unicode_segmentation::UnicodeSegmentation;

const STOP_WORDS: &str = include_str!("stopwords.txt");

fn stop_words() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| STOP_WORDS.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

pub fn is_stop_word(word: &str) -> bool {
    stop_words().contains(word)
}

/// Lowercased unicode words of `text` with stop words removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.unicode_words().map(str::to_lowercase).filter(|w| !is_stop_word(w)).collect()
}

/// Document frequencies over a prompt corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl CorpusStats {
    pub fn from_documents<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut stats = CorpusStats::default();
        for doc in docs {
            stats.n_docs += 1;
            let terms: BTreeSet<String> = tokenize(doc).into_iter().collect();
            for term in terms {
                *stats.df.entry(term).or_insert(0) += 1;
            }
        }
        stats
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, term: &str) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.df(term) as f64)).ln() + 1.0
    }
}

/// Sparse TF-IDF vector with its cached Euclidean norm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl TermVector {
    /// Builds a vector from non-negative weights; zero weights are dropped.
    pub fn from_weights(weights: impl IntoIterator<Item = (String, f64)>) -> Self {
        let weights: BTreeMap<String, f64> = weights.into_iter().filter(|(_, w)| *w > 0.0).collect();
        debug_assert!(weights.values().all(|w| w.is_finite()));
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        TermVector { weights, norm }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Raw term counts weighted by smoothed IDF.
pub fn vectorize(text: &str, stats: &CorpusStats) -> TermVector {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for term in tokenize(text) {
        *counts.entry(term).or_insert(0.0) += 1.0;
    }
    TermVector::from_weights(counts.into_iter().map(|(term, tf)| {
        let idf = stats.idf(&term);
        (term, tf * idf)
    }))
}

/// Cosine similarity in `[0, 1]`; zero when either vector is zero.
pub fn cosine(u: &TermVector, v: &TermVector) -> f64 {
    if u.norm == 0.0 || v.norm == 0.0 {
        return 0.0;
    }
    let (small, large) = if u.weights.len() <= v.weights.len() { (u, v) } else { (v, u) };
    let dot: f64 = small
        .weights
        .iter()
        .filter_map(|(term, w)| large.weights.get(term).map(|x| w * x))
        .fold(0.0, |acc, x| acc + x); // an empty f64 sum would be -0.0
    (dot / (u.norm * v.norm)).clamp(0.0, 1.0)
}
