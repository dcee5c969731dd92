//! HTTP client for OpenAI-compatible completion APIs.

use std::time::Duration;

use async_trait::async_trait;
use reqwest::{Client, StatusCode};
use serde::Deserialize;
use serde_json::json;

use super::{Completion, CompletionBackend, CompletionRequest, EndpointKind, LlmError, TokenUsage};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone)]
pub struct OpenAiConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Delay before the single retry of a transport failure.
    pub retry_backoff: Duration,
}

impl Default for OpenAiConfig {
    fn default() -> Self {
        Self {
            base_url: DEFAULT_BASE_URL.to_string(),
            api_key: None,
            timeout: Duration::from_secs(60),
            retry_backoff: Duration::from_secs(1),
        }
    }
}

impl OpenAiConfig {
    /// Reads `OPENAI_API_KEY` and `OPENAI_BASE_URL`.
    pub fn from_env() -> Self {
        let mut config = Self::default();
        if let Ok(url) = std::env::var("OPENAI_BASE_URL") {
            if !url.trim().is_empty() {
                config.base_url = url;
            }
        }
        config.api_key = std::env::var("OPENAI_API_KEY").ok().filter(|k| !k.is_empty());
        config
    }
}

pub struct OpenAiBackend {
    client: Client,
    config: OpenAiConfig,
}

impl std::fmt::Debug for OpenAiBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpenAiBackend")
            .field("base_url", &self.config.base_url)
            .field("has_api_key", &self.config.api_key.is_some())
            .field("timeout", &self.config.timeout)
            .finish()
    }
}

#[derive(Deserialize)]
struct ApiResponse {
    choices: Vec<ApiChoice>,
    usage: Option<ApiUsage>,
}

#[derive(Deserialize)]
struct ApiChoice {
    message: Option<ApiMessage>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct ApiMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct ApiUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct ApiErrorBody {
    error: ApiErrorDetail,
}

#[derive(Deserialize)]
struct ApiErrorDetail {
    message: String,
}

fn truncate(text: &str, max_chars: usize) -> &str {
    match text.char_indices().nth(max_chars) {
        Some((idx, _)) => &text[..idx],
        None => text,
    }
}

impl OpenAiBackend {
    pub fn new(config: OpenAiConfig) -> Result<Self, LlmError> {
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| LlmError::Configuration(format!("failed to build HTTP client: {e}")))?;
        Ok(Self { client, config })
    }

    fn url(&self, kind: EndpointKind) -> String {
        let base = self.config.base_url.trim_end_matches('/');
        match kind {
            EndpointKind::Chat => format!("{base}/chat/completions"),
            EndpointKind::Text => format!("{base}/completions"),
        }
    }

    async fn send_once(&self, request: &CompletionRequest<'_>) -> Result<Completion, LlmError> {
        let model = request.model;
        let body = match model.endpoint {
            EndpointKind::Chat => json!({
                "model": model.model_id,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": model.temperature,
                "max_tokens": model.max_completion_tokens,
            }),
            EndpointKind::Text => json!({
                "model": model.model_id,
                "prompt": request.prompt,
                "temperature": model.temperature,
                "max_tokens": model.max_completion_tokens,
            }),
        };

        let mut builder = self.client.post(self.url(model.endpoint)).json(&body);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().await.map_err(|e| {
            if e.is_timeout() {
                LlmError::Transport("request timed out".into())
            } else {
                LlmError::Transport(format!("request failed: {}", e.without_url()))
            }
        })?;

        let status = response.status();
        if !status.is_success() {
            let detail = response
                .json::<ApiErrorBody>()
                .await
                .map(|b| truncate(&b.error.message, 200).to_string())
                .unwrap_or_default();
            return Err(classify_status(status, &detail));
        }

        let parsed: ApiResponse = response
            .json()
            .await
            .map_err(|e| LlmError::Backend(format!("malformed response body: {}", e.without_url())))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::Backend("response contained no choices".into()))?;
        let text = match model.endpoint {
            EndpointKind::Chat => choice.message.and_then(|m| m.content),
            EndpointKind::Text => choice.text,
        }
        .ok_or_else(|| LlmError::Backend("response choice had no text".into()))?;
        let usage = parsed
            .usage
            .map(|u| TokenUsage::new(u.prompt_tokens, u.completion_tokens))
            .unwrap_or_default();
        Ok(Completion { text, usage })
    }
}

fn classify_status(status: StatusCode, detail: &str) -> LlmError {
    let msg = if detail.is_empty() {
        format!("HTTP {}", status.as_u16())
    } else {
        format!("HTTP {}: {detail}", status.as_u16())
    };
    match status {
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => LlmError::Configuration(msg),
        s if s.is_server_error() => LlmError::Transport(msg),
        _ => LlmError::Backend(msg),
    }
}

#[async_trait]
impl CompletionBackend for OpenAiBackend {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<Completion, LlmError> {
        if request.prompt.is_empty() {
            return Err(LlmError::Backend("empty prompt".into()));
        }
        request.model.validate()?;
        match self.send_once(&request).await {
            Err(err) if err.is_retryable() => {
                tracing::warn!(stage = %request.stage, error = %err, "completion failed, retrying once");
                tokio::time::sleep(self.config.retry_backoff).await;
                self.send_once(&request).await
            }
            other => other,
        }
    }
}
