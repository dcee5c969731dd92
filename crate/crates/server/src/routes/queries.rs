use axum::extract::State;
use axum::http::StatusCode;
use axum::Json;
use codehelp_core::registry::{Principal, QueryRecord};
use codehelp_core::QueryId;
use serde::Deserialize;

use crate::auth::Authenticated;
use crate::error::ApiError;
use crate::extract::{ApiJson, ApiPath};
use crate::state::AppState;

/// The caller's own queries in the session's class, newest first.
pub async fn own(
    State(state): State<AppState>,
    Authenticated(session): Authenticated,
) -> Result<Json<Vec<QueryRecord>>, ApiError> {
    let records = state
        .with_registry(move |reg| Ok(reg.own_queries(&session.class_id, &session.user_id)?))
        .await?;
    Ok(Json(records))
}

pub async fn one(
    State(state): State<AppState>,
    Authenticated(session): Authenticated,
    ApiPath(id): ApiPath<String>,
) -> Result<Json<QueryRecord>, ApiError> {
    let record = state
        .with_registry(move |reg| {
            let record = reg.get_query(Principal::User(&session.user_id), &QueryId::new(id))?;
            // Staff of another class must not see this one's records.
            if record.class_id != session.class_id && record.user_id != session.user_id {
                return Err(ApiError::forbidden("query belongs to another class"));
            }
            Ok(record)
        })
        .await?;
    Ok(Json(record))
}

#[derive(Debug, Deserialize)]
pub struct FeedbackBody {
    pub helpful: bool,
}

pub async fn feedback(
    State(state): State<AppState>,
    Authenticated(session): Authenticated,
    ApiPath(id): ApiPath<String>,
    ApiJson(body): ApiJson<FeedbackBody>,
) -> Result<StatusCode, ApiError> {
    state
        .with_registry(move |reg| Ok(reg.record_feedback(&QueryId::new(id), &session.user_id, body.helpful)?))
        .await?;
    Ok(StatusCode::NO_CONTENT)
}
