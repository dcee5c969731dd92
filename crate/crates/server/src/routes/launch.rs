use axum::extract::State;
use axum::http::header::{LOCATION, SET_COOKIE};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::Utc;
use codehelp_core::lti::handle_launch;
use codehelp_core::registry::{Principal, User};
use codehelp_core::session::Session;
use codehelp_core::{ClassConfig, ClassId, Role, UserId};
use serde::{Deserialize, Serialize};

use crate::auth::{session_cookie, Authenticated};
use crate::error::ApiError;
use crate::extract::{ApiForm, ApiJson};
use crate::state::AppState;

/// LTI 1.1 basic launch. On success the browser is redirected to the app
/// root carrying a session cookie.
pub async fn lti(State(state): State<AppState>, ApiForm(params): ApiForm<Vec<(String, String)>>) -> Result<Response, ApiError> {
    let verifier = state
        .lti()
        .cloned()
        .ok_or_else(|| ApiError::configuration("LTI launches are not configured on this server"))?;
    let session = state
        .with_registry(move |reg| Ok(handle_launch(&verifier, reg, &params, Utc::now())?))
        .await?;
    tracing::info!(user = %session.user_id, class = %session.class_id, role = session.role.as_str(), "LTI launch");
    let token = state.sessions().issue(&session, Utc::now());
    Ok((
        StatusCode::SEE_OTHER,
        [
            (LOCATION, "/".to_string()),
            (SET_COOKIE, session_cookie(&token, state.secure_cookies())),
        ],
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
pub struct DevLogin {
    pub user_id: String,
    pub class_id: String,
    pub role: Role,
    pub display_name: Option<String>,
    pub class_name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Issued {
    pub token: String,
    pub session: Session,
}

/// Password-less sign-in for local demos and tests. Disabled unless the
/// server was started with the dev-login flag.
pub async fn dev_login(State(state): State<AppState>, ApiJson(body): ApiJson<DevLogin>) -> Result<Response, ApiError> {
    if !state.dev_login() {
        return Err(ApiError::not_found("no such endpoint"));
    }
    if body.user_id.trim().is_empty() || body.class_id.trim().is_empty() {
        return Err(ApiError::validation("user_id and class_id must not be empty"));
    }
    let session = Session {
        user_id: UserId::new(body.user_id.clone()),
        class_id: ClassId::new(body.class_id.clone()),
        role: body.role,
    };
    let s = session.clone();
    state
        .with_registry(move |reg| {
            let name = body.class_name.unwrap_or_else(|| body.class_id.clone());
            reg.ensure_class(&ClassConfig::new(s.class_id.clone(), name))?;
            reg.upsert_user(&User {
                user_id: s.user_id.clone(),
                display_name: body.display_name.unwrap_or(body.user_id),
                lms_identity: None,
            })?;
            reg.set_membership(&s.class_id, &s.user_id, s.role)?;
            Ok(())
        })
        .await?;
    let token = state.sessions().issue(&session, Utc::now());
    let cookie = session_cookie(&token, state.secure_cookies());
    Ok(([(SET_COOKIE, cookie)], Json(Issued { token, session })).into_response())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionInfo {
    pub user_id: UserId,
    pub display_name: String,
    pub class_id: ClassId,
    pub class_name: String,
    pub role: Role,
    pub default_language: String,
}

pub async fn current_session(
    State(state): State<AppState>,
    Authenticated(session): Authenticated,
) -> Result<Json<SessionInfo>, ApiError> {
    let info = state
        .with_registry(move |reg| {
            let user = reg.get_user(&session.user_id)?;
            let config = reg.get_class_config(Principal::User(&session.user_id), &session.class_id)?;
            Ok(SessionInfo {
                user_id: session.user_id,
                display_name: user.display_name,
                class_id: session.class_id,
                class_name: config.name,
                role: session.role,
                default_language: config.default_language,
            })
        })
        .await?;
    Ok(Json(info))
}
