//! JSON over HTTP:
//!
//! - `POST /recommend` `{prompt, n?, threshold?}` → [`RecommendResponse`]
//! - `POST /ratings` `{context, target, rating}` → `{model_version}`
//! - `GET /prompts?q=` → `[{id, text}]`
//! - `GET /health` → `{status, model_version, n_prompts, n_ratings}`
//!
//! Errors are `{"error": message}` with 400 for invalid input, 503 before
//! the dataset is loaded and 500 otherwise.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tokio::net::TcpListener;

use crate::{Health, PromptEntry, RateRequest, RateResponse, RecommendRequest, RecommendResponse, Service, ServiceError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotReady => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Storage(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload.map(|Json(v)| v).map_err(|e| ServiceError::BadRequest(e.body_text()))
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/recommend", post(recommend))
        .route("/ratings", post(rate))
        .route("/prompts", get(prompts))
        .route("/health", get(health))
        .with_state(service)
}

async fn recommend(
    State(service): State<Arc<Service>>,
    payload: Result<Json<RecommendRequest>, JsonRejection>,
) -> Result<Json<RecommendResponse>, ServiceError> {
    let req = body(payload)?;
    Ok(Json(service.recommend(&req)?))
}

async fn rate(
    State(service): State<Arc<Service>>,
    payload: Result<Json<RateRequest>, JsonRejection>,
) -> Result<Json<RateResponse>, ServiceError> {
    let req = body(payload)?;
    // the similarity refresh runs off the async workers
    let ack = tokio::task::spawn_blocking(move || service.rate(&req))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok(Json(ack))
}

#[derive(Debug, Deserialize)]
struct PromptsQuery {
    q: Option<String>,
}

async fn prompts(State(service): State<Arc<Service>>, Query(query): Query<PromptsQuery>) -> Result<Json<Vec<PromptEntry>>, ServiceError> {
    Ok(Json(service.prompts(query.q.as_deref())?))
}

async fn health(State(service): State<Arc<Service>>) -> (StatusCode, Json<Health>) {
    let h = service.health();
    let status = if h.status == "ok" {
        StatusCode::OK
    } else {
        StatusCode::SERVICE_UNAVAILABLE
    };
    (status, Json(h))
}

/// Serves until Ctrl-C.
pub async fn serve(service: Arc<Service>, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
