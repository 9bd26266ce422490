use std::path::PathBuf;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use promptrec::data::{append_record, load_dataset, round_rating, validate_rating, DataError, RatingDataset};
use promptrec::engine::{EngineError, Provenance};
use promptrec::recommender::RatingUpdateError;
use promptrec::text::MatchResult;
use promptrec::{Execution, Recommender, RecommenderConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// List length when a request does not ask for one.
pub const DEFAULT_N: usize = 10;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: String,
    /// Ratings CSV. A missing file starts an empty service; it is created on
    /// the first accepted rating.
    pub data: PathBuf,
    pub recommender: RecommenderConfig,
    /// Append accepted ratings to `data` before the new model is served.
    pub persist: bool,
    pub execution: Execution,
}

impl ServiceConfig {
    pub fn new(data: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".into(),
            data: data.into(),
            recommender: RecommenderConfig::default(),
            persist: true,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("service is not ready")]
    NotReady,
    #[error("{0}")]
    Storage(String),
    #[error("{0}")]
    Internal(String),
}

impl From<DataError> for ServiceError {
    fn from(e: DataError) -> Self {
        let mut msg = e.to_string();
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            msg.push_str(": ");
            msg.push_str(&s.to_string());
            source = s.source();
        }
        ServiceError::Storage(msg)
    }
}

impl From<EngineError> for ServiceError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidConfig(msg) => ServiceError::BadRequest(msg),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<RatingUpdateError> for ServiceError {
    fn from(e: RatingUpdateError) -> Self {
        match e {
            RatingUpdateError::Record(r) => ServiceError::BadRequest(r.to_string()),
            RatingUpdateError::Engine(e) => e.into(),
        }
    }
}

/// A fully built recommender and the version it is served under.
pub struct Snapshot {
    pub recommender: Recommender,
    pub version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommendRequest {
    pub prompt: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseItem {
    pub text: String,
    pub predicted: f64,
    pub rank: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendResponse {
    pub resolved_prompt: MatchResult,
    pub items: Vec<ResponseItem>,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRequest {
    pub context: String,
    pub target: String,
    pub rating: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateResponse {
    pub model_version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptEntry {
    pub id: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_version: u64,
    pub n_prompts: usize,
    pub n_ratings: usize,
}

/// Many readers on immutable snapshots, one writer at a time.
///
/// Readers clone the current `Arc<Snapshot>` and never block on a rebuild.
/// A rating is applied to a private copy, persisted, and only then swapped
/// in, so every response is computed from exactly one model version.
pub struct Service {
    config: ServiceConfig,
    current: RwLock<Option<Arc<Snapshot>>>,
    writer: Mutex<()>,
}

impl Service {
    /// A service that answers 503 until [`Service::load`] succeeds.
    pub fn unloaded(config: ServiceConfig) -> Result<Self, ServiceError> {
        config.recommender.validate()?;
        Ok(Service {
            config,
            current: RwLock::new(None),
            writer: Mutex::new(()),
        })
    }

    pub fn open(config: ServiceConfig) -> Result<Self, ServiceError> {
        let service = Self::unloaded(config)?;
        service.load()?;
        Ok(service)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// (Re)reads the dataset file and installs a fresh model.
    pub fn load(&self) -> Result<u64, ServiceError> {
        let _writer = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let dataset = if self.config.data.exists() {
            load_dataset(&self.config.data)?
        } else {
            RatingDataset::new()
        };
        let recommender = Recommender::from_dataset(&dataset, self.config.recommender, self.config.execution)?;
        let version = self.snapshot().map_or(1, |s| s.version + 1);
        self.install(Snapshot { recommender, version });
        Ok(version)
    }

    fn install(&self, snapshot: Snapshot) {
        *self.current.write().unwrap_or_else(PoisonError::into_inner) = Some(Arc::new(snapshot));
    }

    pub fn snapshot(&self) -> Result<Arc<Snapshot>, ServiceError> {
        self.current
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .clone()
            .ok_or(ServiceError::NotReady)
    }

    pub fn recommend(&self, req: &RecommendRequest) -> Result<RecommendResponse, ServiceError> {
        if req.prompt.trim().is_empty() {
            return Err(ServiceError::BadRequest("prompt must not be empty".into()));
        }
        if let Some(t) = req.threshold {
            if !(1.0..=5.0).contains(&t) {
                return Err(ServiceError::BadRequest(format!("threshold {t} is outside [1, 5]")));
            }
        }
        let snapshot = self.snapshot()?;
        let outcome = snapshot
            .recommender
            .recommend(&req.prompt, req.n.unwrap_or(DEFAULT_N), req.threshold)?;
        Ok(RecommendResponse {
            resolved_prompt: outcome.resolved,
            items: outcome
                .items
                .into_iter()
                .map(|r| ResponseItem {
                    text: r.text,
                    predicted: r.predicted,
                    rank: r.rank,
                    provenance: r.provenance,
                })
                .collect(),
            model_version: snapshot.version,
        })
    }

    /// Validates, persists and applies one rating. Nothing is written when
    /// the rating is rejected.
    pub fn rate(&self, req: &RateRequest) -> Result<RateResponse, ServiceError> {
        let rating = round_rating(validate_rating(req.rating).map_err(|e| ServiceError::BadRequest(e.to_string()))?);
        // stored text must survive the CSV round trip unchanged
        let (context, target) = (req.context.trim(), req.target.trim());
        let _writer = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let current = self.snapshot()?;
        let (recommender, _) = current.recommender.with_rating(context, target, rating, self.config.execution)?;
        if self.config.persist {
            append_record(&self.config.data, context, target, rating)?;
        }
        let version = current.version + 1;
        self.install(Snapshot { recommender, version });
        Ok(RateResponse { model_version: version })
    }

    /// Catalog prompts in id order, optionally filtered by a
    /// case-insensitive substring.
    pub fn prompts(&self, filter: Option<&str>) -> Result<Vec<PromptEntry>, ServiceError> {
        Ok(self
            .snapshot()?
            .recommender
            .prompts(filter)
            .into_iter()
            .map(|(id, text)| PromptEntry { id: id.0, text })
            .collect())
    }

    pub fn health(&self) -> Health {
        match self.snapshot() {
            Ok(s) => Health {
                status: "ok".into(),
                model_version: s.version,
                n_prompts: s.recommender.matrix().catalog().len(),
                n_ratings: s.recommender.matrix().observation_count(),
            },
            Err(_) => Health {
                status: "loading".into(),
                model_version: 0,
                n_prompts: 0,
                n_ratings: 0,
            },
        }
    }
}
