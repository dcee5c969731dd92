use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;

use crate::error::ApiError;
use crate::state::AppState;

mod analytics;
mod help;
mod instructor;
mod launch;
mod queries;

pub use help::{MAX_CODE_BYTES, MAX_ISSUE_BYTES};

/// Request bodies larger than this are rejected before parsing.
const BODY_LIMIT: usize = 256 * 1024;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/session", get(launch::current_session))
        .route("/api/help", post(help::create))
        .route("/api/queries", get(queries::own))
        .route("/api/queries/{id}", get(queries::one))
        .route("/api/queries/{id}/feedback", post(queries::feedback))
        .route("/api/instructor/queries", get(instructor::queries))
        .route("/api/instructor/users", get(instructor::users))
        .route("/api/instructor/export.csv", get(instructor::export))
        .route(
            "/api/instructor/class-config",
            get(instructor::get_config).put(instructor::put_config),
        )
        .route("/api/instructor/analytics/weekly", get(analytics::weekly))
        .route("/api/instructor/analytics/heatmap", get(analytics::heatmap))
        .route("/api/instructor/analytics/intensity", get(analytics::intensity))
        .route("/lti/launch", post(launch::lti))
        .route("/dev/login", post(launch::dev_login))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}
