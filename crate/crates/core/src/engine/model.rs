use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{Invalidation, PromptId, RatingMatrix};
use crate::par::{self, Execution};

use super::pearson::{pair_similarity, PairSimilarity};
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionRule {
    /// Similarity-weighted average of the context's own ratings.
    #[default]
    WeightedAverage,
    /// Target mean plus the similarity-weighted deviation of each neighbor
    /// rating from that neighbor's mean.
    MeanCentered,
}

/// Engine knobs shared by model building and querying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub k_neighbors: usize,
    pub min_support: usize,
    pub rule: PredictionRule,
    /// Keep targets the context already rated in top-N candidate sets.
    pub include_rated: bool,
    /// Minimum number of received ratings for the popularity fallback.
    pub min_received: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            k_neighbors: 40,
            min_support: 2,
            rule: PredictionRule::WeightedAverage,
            include_rated: false,
            min_received: 1,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k_neighbors < 1 {
            return Err(EngineError::InvalidConfig("k_neighbors must be at least 1".into()));
        }
        if self.min_support < 2 {
            return Err(EngineError::InvalidConfig("min_support must be at least 2".into()));
        }
        Ok(())
    }
}

fn ordered(a: PromptId, b: PromptId) -> (PromptId, PromptId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Pairwise Pearson similarities of a matrix snapshot.
///
/// Each unordered pair is stored once, so lookups are symmetric by
/// construction. Per-prompt neighbor lists are kept sorted by similarity
/// descending, then id ascending.
#[derive(Debug, Clone)]
pub struct SimilarityModel {
    config: EngineConfig,
    pairs: HashMap<(PromptId, PromptId), PairSimilarity>,
    neighbors: Vec<Vec<(PromptId, f64)>>,
}

impl PartialEq for SimilarityModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.pairs == other.pairs
    }
}

fn candidates(matrix: &RatingMatrix) -> Vec<PromptId> {
    // a prompt with fewer than two raters can never reach min_support
    matrix.rated_targets().filter(|&id| matrix.column(id).len() >= 2).collect()
}

impl SimilarityModel {
    /// Computes every defined pairwise similarity of `matrix`.
    pub fn build(matrix: &RatingMatrix, config: EngineConfig, execution: Execution) -> Result<Self, EngineError> {
        config.validate()?;
        if matrix.is_empty() {
            return Err(EngineError::EmptyMatrix);
        }
        let items = candidates(matrix);
        let rows = par::map(&(0..items.len()).collect::<Vec<_>>(), execution, |&i| {
            let a = items[i];
            items[i + 1..]
                .iter()
                .filter_map(|&b| pair_similarity(matrix, a, b, config.min_support).map(|s| ((a, b), s)))
                .collect::<Vec<_>>()
        });
        Ok(Self::assemble(config, matrix.catalog().len(), rows.into_iter().flatten().collect()))
    }

    /// A model with no pairs, for an empty matrix.
    pub fn empty(config: EngineConfig, n_prompts: usize) -> Self {
        Self::assemble(config, n_prompts, HashMap::new())
    }

    fn assemble(config: EngineConfig, n_prompts: usize, pairs: HashMap<(PromptId, PromptId), PairSimilarity>) -> Self {
        let mut neighbors = vec![Vec::new(); n_prompts];
        for (&(a, b), s) in &pairs {
            neighbors[a.index()].push((b, s.similarity));
            neighbors[b.index()].push((a, s.similarity));
        }
        for list in &mut neighbors {
            list.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        }
        SimilarityModel { config, pairs, neighbors }
    }

    /// A new model reflecting `matrix` after the change described by
    /// `invalidation`: pairs touching a stale prompt are recomputed, all
    /// others are carried over.
    pub fn refresh(&self, matrix: &RatingMatrix, invalidation: &Invalidation, execution: Execution) -> Result<Self, EngineError> {
        if matrix.is_empty() {
            return Err(EngineError::EmptyMatrix);
        }
        let stale: BTreeSet<PromptId> = invalidation.stale.iter().copied().collect();
        let mut pairs: HashMap<_, _> = self
            .pairs
            .iter()
            .filter(|((a, b), _)| !stale.contains(a) && !stale.contains(b))
            .map(|(k, v)| (*k, *v))
            .collect();
        let items = candidates(matrix);
        let stale: Vec<PromptId> = stale.into_iter().collect();
        let config = self.config;
        let fresh = par::map(&stale, execution, |&s| {
            items
                .iter()
                .filter(|&&x| x != s)
                .filter_map(|&x| pair_similarity(matrix, s, x, config.min_support).map(|p| (ordered(s, x), p)))
                .collect::<Vec<_>>()
        });
        pairs.extend(fresh.into_iter().flatten());
        Ok(Self::assemble(config, matrix.catalog().len(), pairs))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Same pairs, different query-time knobs (k, rule, candidate policy).
    /// `min_support` is fixed at build time and is kept.
    pub fn with_query_config(mut self, config: EngineConfig) -> Self {
        self.config = EngineConfig {
            min_support: self.config.min_support,
            ..config
        };
        self
    }

    pub fn similarity(&self, a: PromptId, b: PromptId) -> Option<f64> {
        self.pairs.get(&ordered(a, b)).map(|s| s.similarity)
    }

    pub fn pair(&self, a: PromptId, b: PromptId) -> Option<PairSimilarity> {
        self.pairs.get(&ordered(a, b)).copied()
    }

    /// Number of stored (unordered) pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stored pairs as `(a, b, similarity, support)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(PromptId, PromptId, f64, usize)> {
        let mut out: Vec<_> = self.pairs.iter().map(|(&(a, b), s)| (a, b, s.similarity, s.support)).collect();
        out.sort_by_key(|&(a, b, _, _)| (a, b));
        out
    }

    /// Prompts with a defined similarity to `id`, most similar first.
    pub fn neighbors(&self, id: PromptId) -> &[(PromptId, f64)] {
        self.neighbors.get(id.index()).map_or(&[], Vec::as_slice)
    }
}

/// Builds a model with default query knobs.
pub fn build_similarity_model(matrix: &RatingMatrix, min_support: usize, k: usize) -> Result<SimilarityModel, EngineError> {
    let config = EngineConfig {
        k_neighbors: k,
        min_support,
        ..EngineConfig::default()
    };
    SimilarityModel::build(matrix, config, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DedupPolicy, RatingDataset};

    fn three_prompt_matrix() -> RatingMatrix {
        // x and y share three co-raters; z shares at most one with either
        let mut d = RatingDataset::new();
        for (c, rx, ry) in [("c1", 1.0, 2.0), ("c2", 3.0, 3.5), ("c3", 5.0, 4.0)] {
            d.push(c, "x", rx).unwrap();
            d.push(c, "y", ry).unwrap();
        }
        d.push("c1", "z", 2.0).unwrap();
        d.push("c4", "z", 4.0).unwrap();
        RatingMatrix::build(&d, DedupPolicy::Mean)
    }

    #[test]
    fn stores_only_supported_pairs() {
        let m = three_prompt_matrix();
        let model = build_similarity_model(&m, 2, 40).unwrap();
        assert_eq!(model.len(), 1);
        let (x, y) = (m.catalog().lookup("x").unwrap(), m.catalog().lookup("y").unwrap());
        assert!(model.similarity(x, y).unwrap() > 0.9);
        assert_eq!(model.similarity(x, y), model.similarity(y, x));
        assert_eq!(model.pair(x, y).unwrap().support, 3);
        assert_eq!(model.neighbors(x), &[(y, model.similarity(x, y).unwrap())]);
    }

    #[test]
    fn high_min_support_empties_model() {
        let m = three_prompt_matrix();
        assert!(build_similarity_model(&m, 4, 40).unwrap().is_empty());
    }

    #[test]
    fn empty_matrix_errors() {
        let m = RatingMatrix::build(&RatingDataset::new(), DedupPolicy::Mean);
        assert!(matches!(build_similarity_model(&m, 2, 40), Err(EngineError::EmptyMatrix)));
    }

    #[test]
    fn invalid_knobs() {
        let m = three_prompt_matrix();
        assert!(matches!(build_similarity_model(&m, 1, 40), Err(EngineError::InvalidConfig(_))));
        assert!(matches!(build_similarity_model(&m, 2, 0), Err(EngineError::InvalidConfig(_))));
    }

    #[test]
    fn refresh_matches_rebuild() {
        let mut m = three_prompt_matrix();
        let config = EngineConfig::default();
        let model = SimilarityModel::build(&m, config, Execution::Sequential).unwrap();
        // z gains a second co-rater with x and y
        let inv = m.add_rating("c3", "z", 5.0).unwrap();
        let refreshed = model.refresh(&m, &inv, Execution::Sequential).unwrap();
        let rebuilt = SimilarityModel::build(&m, config, Execution::Sequential).unwrap();
        assert_eq!(refreshed, rebuilt);
        assert_eq!(rebuilt.len(), 3);
    }
}
