use axum::extract::State;
use axum::Json;
use codehelp_core::llm::estimate_cost;
use codehelp_core::registry::Principal;
use codehelp_core::{GuardedResponse, HelpQuery, QueryId};
use serde::{Deserialize, Serialize};

use crate::auth::Authenticated;
use crate::error::ApiError;
use crate::extract::ApiJson;
use crate::state::AppState;

pub const MAX_CODE_BYTES: usize = 64 * 1024;
pub const MAX_ISSUE_BYTES: usize = 8 * 1024;

#[derive(Debug, Deserialize)]
pub struct HelpRequest {
    /// Falls back to the class's default language when absent or blank.
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub code: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
    pub issue: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HelpResponse {
    pub query_id: QueryId,
    pub response: GuardedResponse,
}

fn check_size(field: &str, value: Option<&str>, limit: usize) -> Result<(), ApiError> {
    match value {
        Some(v) if v.len() > limit => Err(ApiError::validation(format!(
            "{field} is {} bytes; the limit is {limit}",
            v.len()
        ))),
        _ => Ok(()),
    }
}

pub async fn create(
    State(state): State<AppState>,
    Authenticated(session): Authenticated,
    ApiJson(body): ApiJson<HelpRequest>,
) -> Result<Json<HelpResponse>, ApiError> {
    check_size("code", body.code.as_deref(), MAX_CODE_BYTES)?;
    check_size("error", body.error.as_deref(), MAX_CODE_BYTES)?;
    check_size("issue", Some(&body.issue), MAX_ISSUE_BYTES)?;

    let (user, class) = (session.user_id.clone(), session.class_id.clone());
    let config = state
        .with_registry(move |reg| Ok(reg.get_class_config(Principal::User(&user), &class)?))
        .await?;
    let language = body
        .language
        .filter(|l| !l.trim().is_empty())
        .unwrap_or_else(|| config.default_language.clone());
    let query = HelpQuery::new(language, body.code, body.error, body.issue)?;

    let response = state.pipeline().run(&query, &config).await?;
    match estimate_cost(&response.model_usages(), state.prices()) {
        Ok(cost) => tracing::info!(class = %session.class_id, %cost, tokens = response.usage.total(), "help query answered"),
        Err(e) => tracing::warn!(error = %e, "could not price help query"),
    }

    let saved = response.clone();
    let query_id = state
        .with_registry(move |reg| Ok(reg.save_query(&session.class_id, &session.user_id, &query, &saved)?))
        .await?;
    Ok(Json(HelpResponse { query_id, response }))
}
