use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{DedupPolicy, RatingDataset, RatingMatrix};
use crate::engine::{predict_rating, EngineConfig, SimilarityModel};
use crate::par::{self, Execution};

use super::metrics::{f1, mae, precision_recall, rmse, EmptyConvention, PrecisionBase, PredictionPair, RetrievalCounts};
use super::split::{complement, fold_indices};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub folds: usize,
    pub top_n: usize,
    pub threshold: f64,
    pub seed: u64,
    pub engine: EngineConfig,
    pub dedup: DedupPolicy,
    pub empty: EmptyConvention,
    pub precision_base: PrecisionBase,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            folds: 10,
            top_n: 10,
            threshold: 3.0,
            seed: 1,
            engine: EngineConfig::default(),
            dedup: DedupPolicy::Mean,
            empty: EmptyConvention::One,
            precision_base: PrecisionBase::Gated,
            execution: Execution::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.folds < 2 {
            return Err(EvalError::InvalidConfig("folds must be at least 2".into()));
        }
        if self.top_n < 1 {
            return Err(EvalError::InvalidConfig("top_n must be at least 1".into()));
        }
        if !(1.0..=5.0).contains(&self.threshold) {
            return Err(EvalError::InvalidConfig(format!("threshold {} is outside [1, 5]", self.threshold)));
        }
        self.engine.validate().map_err(EvalError::Engine)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub counts: RetrievalCounts,
    #[serde(flatten)]
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub per_fold: Vec<FoldMetrics>,
    pub aggregate: Metrics,
}

/// Held-out predictions of one fold, reusable across thresholds.
#[derive(Debug, Clone)]
pub struct FoldPredictions {
    pub fold: usize,
    pub train_size: usize,
    pub pairs: Vec<PredictionPair>,
}

/// Trains on each fold's complement and predicts every held-out record.
/// Folds run under `config.execution` and come back in fold order.
pub fn fold_predictions(dataset: &RatingDataset, config: &EvalConfig) -> Result<Vec<FoldPredictions>, EvalError> {
    config.validate()?;
    let n = dataset.len();
    let folds = fold_indices(n, config.folds, config.seed)?;
    let indexed: Vec<(usize, Vec<usize>)> = folds.into_iter().enumerate().collect();
    par::map(&indexed, config.execution, |(fold, test)| {
        let train = dataset.subset(&complement(n, test));
        let matrix = RatingMatrix::build(&train, config.dedup);
        if matrix.is_empty() {
            return Err(EvalError::EmptyTrain { fold: *fold });
        }
        let model = SimilarityModel::build(&matrix, config.engine, config.execution)?;
        let pairs = test
            .iter()
            .map(|&i| {
                let record = dataset.records[i];
                let p = predict_rating(&model, &matrix, record.context, record.target)?;
                Ok(PredictionPair {
                    context: record.context,
                    target: record.target,
                    actual: record.rating,
                    predicted: p.predicted,
                })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        Ok(FoldPredictions {
            fold: *fold,
            train_size: train.len(),
            pairs,
        })
    })
    .into_iter()
    .collect()
}

/// Scores precomputed fold predictions at `config.threshold`.
pub fn report_from_predictions(folds: &[FoldPredictions], config: &EvalConfig) -> Result<EvalReport, EvalError> {
    config.validate()?;
    let per_fold = folds
        .iter()
        .map(|f| {
            let (counts, precision, recall) =
                precision_recall(&f.pairs, config.top_n, config.threshold, config.precision_base, config.empty)?;
            Ok(FoldMetrics {
                fold: f.fold,
                train_size: f.train_size,
                test_size: f.pairs.len(),
                counts,
                metrics: Metrics {
                    mae: mae(&f.pairs)?,
                    rmse: rmse(&f.pairs)?,
                    precision,
                    recall,
                    f1: f1(precision, recall),
                },
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let aggregate = mean_metrics(per_fold.iter().map(|f| &f.metrics));
    Ok(EvalReport {
        config: *config,
        per_fold,
        aggregate,
    })
}

fn mean_metrics<'a>(metrics: impl ExactSizeIterator<Item = &'a Metrics>) -> Metrics {
    let n = metrics.len() as f64;
    let mut sum = Metrics::default();
    for m in metrics {
        sum.mae += m.mae;
        sum.rmse += m.rmse;
        sum.precision += m.precision;
        sum.recall += m.recall;
        sum.f1 += m.f1;
    }
    Metrics {
        mae: sum.mae / n,
        rmse: sum.rmse / n,
        precision: sum.precision / n,
        recall: sum.recall / n,
        f1: sum.f1 / n,
    }
}

/// Full k-fold run at one threshold.
pub fn cross_validate(dataset: &RatingDataset, config: &EvalConfig) -> Result<EvalReport, EvalError> {
    let folds = fold_predictions(dataset, config)?;
    report_from_predictions(&folds, config)
}

/// One report per threshold, sharing the trained folds.
pub fn cross_validate_thresholds(dataset: &RatingDataset, config: &EvalConfig, thresholds: &[f64]) -> Result<Vec<EvalReport>, EvalError> {
    let folds = fold_predictions(dataset, config)?;
    thresholds
        .iter()
        .map(|&threshold| report_from_predictions(&folds, &EvalConfig { threshold, ..*config }))
        .collect()
}

/// Aligned plain-text table, one row per report.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<9}  {:>6}  {:>6}  {:>9}  {:>6}  {:>6}",
        "Threshold", "MAE", "RMSE", "Precision", "Recall", "F1"
    );
    for r in reports {
        let a = &r.aggregate;
        let _ = writeln!(
            out,
            "{:<9}  {:>6.4}  {:>6.4}  {:>9.4}  {:>6.4}  {:>6.4}",
            format!("{:.1}", r.config.threshold),
            a.mae,
            a.rmse,
            a.precision,
            a.recall,
            a.f1
        );
    }
    out
}
