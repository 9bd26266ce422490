use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::catalog::{normalize, PromptCatalog, PromptId};
use super::dataset::{validate_rating, RatingDataset, RecordError};

/// Rating used wherever a global mean is needed but the matrix is empty.
pub const MIDPOINT_RATING: f64 = 3.0;

/// How repeated observations of one `(context, target)` pair collapse into a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupPolicy {
    #[default]
    Mean,
    Last,
    First,
}

impl FromStr for DedupPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(DedupPolicy::Mean),
            "last" => Ok(DedupPolicy::Last),
            "first" => Ok(DedupPolicy::First),
            other => Err(format!("unknown dedup policy {other:?} (expected mean, last or first)")),
        }
    }
}

/// Every observation that landed in one cell, enough to re-aggregate under
/// any policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    sum: f64,
    count: u32,
    first: f64,
    last: f64,
}

impl Cell {
    fn new(rating: f64) -> Self {
        Cell {
            sum: rating,
            count: 1,
            first: rating,
            last: rating,
        }
    }

    fn observe(&mut self, rating: f64) {
        self.sum += rating;
        self.count += 1;
        self.last = rating;
    }

    pub fn observations(&self) -> u32 {
        self.count
    }

    pub fn value(&self, policy: DedupPolicy) -> f64 {
        match policy {
            DedupPolicy::Mean => self.sum / f64::from(self.count),
            DedupPolicy::Last => self.last,
            DedupPolicy::First => self.first,
        }
    }
}

/// Prompts whose cached similarities went stale after [`RatingMatrix::add_rating`].
///
/// Only similarities with `target` as one side can change: a new cell for
/// `(context, target)` alters the co-rater sets of pairs `(target, x)` for
/// every `x` the context rated.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Invalidation {
    pub stale: Vec<PromptId>,
    pub new_prompts: Vec<PromptId>,
}

/// Sparse context → target matrix of aggregated ratings.
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    catalog: PromptCatalog,
    policy: DedupPolicy,
    rows: Vec<BTreeMap<PromptId, Cell>>,
    // target -> context -> aggregated value, mirrors `rows`
    cols: Vec<BTreeMap<PromptId, f64>>,
    cells: usize,
    observations: usize,
    global_mean: Option<f64>,
}

impl RatingMatrix {
    /// An empty matrix over `catalog`.
    pub fn with_catalog(catalog: PromptCatalog, policy: DedupPolicy) -> Self {
        let n = catalog.len();
        RatingMatrix {
            catalog,
            policy,
            rows: vec![BTreeMap::new(); n],
            cols: vec![BTreeMap::new(); n],
            cells: 0,
            observations: 0,
            global_mean: None,
        }
    }

    /// Collapses duplicate pairs in `dataset` according to `policy`.
    pub fn build(dataset: &RatingDataset, policy: DedupPolicy) -> Self {
        let mut matrix = Self::with_catalog(dataset.catalog.clone(), policy);
        for record in &dataset.records {
            matrix.observe(record.context, record.target, record.rating);
        }
        matrix.refresh_global_mean();
        matrix
    }

    fn grow(&mut self) {
        let n = self.catalog.len();
        if self.rows.len() < n {
            self.rows.resize_with(n, BTreeMap::new);
            self.cols.resize_with(n, BTreeMap::new);
        }
    }

    fn observe(&mut self, context: PromptId, target: PromptId, rating: f64) {
        debug_assert_ne!(context, target);
        let row = &mut self.rows[context.index()];
        let value = match row.get_mut(&target) {
            Some(cell) => {
                cell.observe(rating);
                cell.value(self.policy)
            }
            None => {
                row.insert(target, Cell::new(rating));
                self.cells += 1;
                rating
            }
        };
        self.cols[target.index()].insert(context, value);
        self.observations += 1;
    }

    fn refresh_global_mean(&mut self) {
        self.global_mean = if self.cells == 0 {
            None
        } else {
            let sum: f64 = self.cols.iter().flat_map(|col| col.values()).sum();
            Some(sum / self.cells as f64)
        };
    }

    /// Ingests one observation by prompt text, registering unseen prompts.
    ///
    /// On error the matrix is left untouched.
    pub fn add_rating(&mut self, context: &str, target: &str, rating: f64) -> Result<Invalidation, RecordError> {
        let rating = validate_rating(rating)?;
        let (context_key, target_key) = (normalize(context), normalize(target));
        if context_key.is_empty() || target_key.is_empty() {
            return Err(RecordError::EmptyPrompt);
        }
        if context_key == target_key {
            return Err(RecordError::SelfRating);
        }
        let before = self.catalog.len();
        let context = self.catalog.intern(context).ok_or(RecordError::EmptyPrompt)?;
        let target = self.catalog.intern(target).ok_or(RecordError::EmptyPrompt)?;
        self.grow();
        self.observe(context, target, rating);
        self.refresh_global_mean();

        let new_prompts: Vec<PromptId> = (before..self.catalog.len()).map(|i| PromptId(i as u32)).collect();
        let mut stale = vec![target];
        stale.extend(new_prompts.iter().copied().filter(|&id| id != target));
        stale.sort();
        Ok(Invalidation { stale, new_prompts })
    }

    pub fn catalog(&self) -> &PromptCatalog {
        &self.catalog
    }

    pub fn policy(&self) -> DedupPolicy {
        self.policy
    }

    /// Number of distinct `(context, target)` cells.
    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// Number of raw observations folded into the cells.
    pub fn observation_count(&self) -> usize {
        self.observations
    }

    pub fn is_empty(&self) -> bool {
        self.cells == 0
    }

    /// Mean of all cell values, `None` on an empty matrix.
    pub fn global_mean(&self) -> Option<f64> {
        self.global_mean
    }

    pub fn global_mean_or_midpoint(&self) -> f64 {
        self.global_mean.unwrap_or(MIDPOINT_RATING)
    }

    pub fn rating(&self, context: PromptId, target: PromptId) -> Option<f64> {
        self.rows.get(context.index())?.get(&target).map(|cell| cell.value(self.policy))
    }

    pub fn cell(&self, context: PromptId, target: PromptId) -> Option<&Cell> {
        self.rows.get(context.index())?.get(&target)
    }

    /// Targets rated by `context` with their aggregated values, by id.
    pub fn row(&self, context: PromptId) -> impl Iterator<Item = (PromptId, f64)> + '_ {
        let policy = self.policy;
        self.rows
            .get(context.index())
            .into_iter()
            .flat_map(move |row| row.iter().map(move |(&t, cell)| (t, cell.value(policy))))
    }

    pub fn row_len(&self, context: PromptId) -> usize {
        self.rows.get(context.index()).map_or(0, BTreeMap::len)
    }

    pub fn has_rated(&self, context: PromptId, target: PromptId) -> bool {
        self.rows.get(context.index()).is_some_and(|row| row.contains_key(&target))
    }

    /// Contexts that rated `target`, keyed by context id.
    pub fn column(&self, target: PromptId) -> &BTreeMap<PromptId, f64> {
        static EMPTY: BTreeMap<PromptId, f64> = BTreeMap::new();
        self.cols.get(target.index()).unwrap_or(&EMPTY)
    }

    /// Mean rating `target` received, `None` if nobody rated it.
    pub fn received_mean(&self, target: PromptId) -> Option<f64> {
        let col = self.column(target);
        if col.is_empty() {
            None
        } else {
            Some(col.values().sum::<f64>() / col.len() as f64)
        }
    }

    /// Prompts that received at least one rating.
    pub fn rated_targets(&self) -> impl Iterator<Item = PromptId> + '_ {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, col)| !col.is_empty())
            .map(|(i, _)| PromptId(i as u32))
    }
}
