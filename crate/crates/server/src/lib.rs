//! HTTP API for the help service: the student help flow, feedback,
//! instructor oversight and configuration, analytics, and LTI launch.

use std::sync::Arc;

use chrono::Duration;
use codehelp_core::llm::openai::{OpenAiBackend, OpenAiConfig};
use codehelp_core::lti::LaunchVerifier;
use codehelp_core::registry::{Registry, RegistryError};
use codehelp_core::session::SessionKeys;
use codehelp_core::{CompletionBackend, LlmError, Pipeline};

mod auth;
pub mod config;
mod error;
mod extract;
mod routes;
mod state;

pub use auth::SESSION_COOKIE;
pub use config::ServerConfig;
pub use error::{ApiError, ErrorBody, ErrorCode};
pub use routes::{router, MAX_CODE_BYTES, MAX_ISSUE_BYTES};
pub use state::AppState;

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("cannot open the query store: {0}")]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: std::net::SocketAddr,
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Serve(std::io::Error),
}

/// The OpenAI-compatible backend configured from `OPENAI_*` variables.
pub fn provider_backend() -> Result<Arc<dyn CompletionBackend>, StartupError> {
    Ok(Arc::new(OpenAiBackend::new(OpenAiConfig::from_env())?))
}

pub fn build_state(config: &ServerConfig, backend: Arc<dyn CompletionBackend>) -> Result<AppState, StartupError> {
    config.validate()?;
    let registry = match &config.database {
        Some(path) => Registry::open(path)?,
        None => Registry::open_in_memory()?,
    };
    let sessions = SessionKeys::new(config.session_secret_bytes(), Duration::hours(config.session_ttl_hours));
    let mut state = AppState::new(registry, Pipeline::new(backend, config.models.clone()), sessions)
        .with_dev_login(config.dev_login)
        .with_secure_cookies(config.public_url.starts_with("https://"))
        .with_prices(config.prices.clone());
    if !config.lti_consumers.is_empty() {
        state = state.with_lti(LaunchVerifier::new(config.lti_consumers.clone(), config.launch_url()));
    }
    Ok(state)
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: ServerConfig, backend: Arc<dyn CompletionBackend>) -> Result<(), StartupError> {
    let state = build_state(&config, backend)?;
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| StartupError::Bind { addr: config.bind, source })?;
    tracing::info!(addr = %config.bind, launch_url = %config.launch_url(), dev_login = config.dev_login, "listening");
    axum::serve(listener, router(state).layer(tower_http::trace::TraceLayer::new_for_http()))
        .with_graceful_shutdown(async {
            tokio::signal::ctrl_c().await.ok();
        })
        .await
        .map_err(StartupError::Serve)
}
