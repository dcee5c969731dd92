use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use codehelp_core::analytics::AnalyticsError;
use codehelp_core::lti::LtiError;
use codehelp_core::registry::RegistryError;
use codehelp_core::session::SessionError;
use codehelp_core::{ConfigError, PipelineError, QueryError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Validation,
    NotFound,
    Authorization,
    BackendFailure,
    Replay,
    Configuration,
}

/// Every failed request is answered with exactly one of these, as
/// `{"error": {"code": ..., "message": ...}}`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: ErrorCode,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, ErrorCode::Validation, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, ErrorCode::NotFound, message)
    }

    /// No valid session was presented.
    pub fn unauthenticated(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNAUTHORIZED, ErrorCode::Authorization, message)
    }

    /// A valid session that lacks the needed role or ownership.
    pub fn forbidden(message: impl Into<String>) -> Self {
        Self::new(StatusCode::FORBIDDEN, ErrorCode::Authorization, message)
    }

    pub fn backend_failure(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_GATEWAY, ErrorCode::BackendFailure, message)
    }

    pub fn configuration(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Configuration, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code,
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::NotFound(_) => Self::not_found(e.to_string()),
            RegistryError::Authorization(_) => Self::forbidden(e.to_string()),
            RegistryError::Validation(_) => Self::validation(e.to_string()),
            RegistryError::Storage(detail) => {
                tracing::error!(%detail, "storage failure");
                Self::new(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    ErrorCode::BackendFailure,
                    "the query store is unavailable",
                )
            }
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        // Provider error bodies can echo request content, so they stay in the log.
        tracing::warn!(error = %e, "help pipeline failed");
        Self::backend_failure("the language model backend could not produce a response; please try again")
    }
}

impl From<LtiError> for ApiError {
    fn from(e: LtiError) -> Self {
        match e {
            LtiError::Authentication(_) => Self::unauthenticated(e.to_string()),
            LtiError::Replay(_) => Self::new(StatusCode::UNAUTHORIZED, ErrorCode::Replay, e.to_string()),
            LtiError::Configuration(_) => Self::new(StatusCode::BAD_REQUEST, ErrorCode::Configuration, e.to_string()),
            LtiError::Malformed(_) => Self::validation(e.to_string()),
            LtiError::Registry(inner) => inner.into(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self::unauthenticated(e.to_string())
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        Self::validation(e.to_string())
    }
}
