//! Operational shell around the recommender: a snapshot-swapping service
//! core ([`Service`]), its JSON-over-HTTP routes ([`api`]), and the
//! `promptrec` command line ([`cli`]).

pub mod api;
pub mod cli;
mod service;

pub use service::{
    Health, PromptEntry, RateRequest, RateResponse, RecommendRequest, RecommendResponse, ResponseItem, Service, ServiceConfig,
    ServiceError, Snapshot, DEFAULT_N,
};
