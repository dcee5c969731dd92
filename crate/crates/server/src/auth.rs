use axum::extract::FromRequestParts;
use axum::http::header::{AUTHORIZATION, COOKIE};
use axum::http::request::Parts;
use chrono::Utc;
use codehelp_core::session::Session;

use crate::error::ApiError;
use crate::state::AppState;

pub const SESSION_COOKIE: &str = "codehelp_session";

fn bearer(parts: &Parts) -> Option<&str> {
    let value = parts.headers.get(AUTHORIZATION)?.to_str().ok()?;
    value.strip_prefix("Bearer ").map(str::trim)
}

fn cookie(parts: &Parts) -> Option<&str> {
    parts
        .headers
        .get_all(COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|pair| pair.trim().split_once('='))
        .find(|(name, _)| *name == SESSION_COOKIE)
        .map(|(_, value)| value)
}

/// `Set-Cookie` value carrying a session token.
pub fn session_cookie(token: &str, secure: bool) -> String {
    // LMS launches usually render inside a cross-site iframe, which needs
    // SameSite=None, and browsers only accept that together with Secure.
    if secure {
        format!("{SESSION_COOKIE}={token}; Path=/; HttpOnly; Secure; SameSite=None")
    } else {
        format!("{SESSION_COOKIE}={token}; Path=/; HttpOnly; SameSite=Lax")
    }
}

/// Any signed-in user. Accepts `Authorization: Bearer` or the session cookie.
pub struct Authenticated(pub Session);

impl FromRequestParts<AppState> for Authenticated {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = bearer(parts)
            .or_else(|| cookie(parts))
            .ok_or_else(|| ApiError::unauthenticated("sign in through your course to use this service"))?;
        Ok(Self(state.sessions().validate(token, Utc::now())?))
    }
}

/// An instructor or TA session.
pub struct Staff(pub Session);

impl FromRequestParts<AppState> for Staff {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let Authenticated(session) = Authenticated::from_request_parts(parts, state).await?;
        if !session.is_staff() {
            return Err(ApiError::forbidden("instructor or TA role required"));
        }
        Ok(Self(session))
    }
}
