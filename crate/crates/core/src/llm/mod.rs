//! Completion provider abstraction.
//!
//! Every request to a language model goes through [`CompletionBackend`]. The
//! pipeline never talks to a provider directly; it hands a
//! [`CompletionRequest`] to whatever backend was injected, which is either the
//! HTTP client in [`openai`] or the scripted [`mock::ScriptedBackend`].

pub mod cost;
pub mod mock;
pub mod openai;

use std::fmt;
use std::ops::{Add, AddAssign};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

pub use cost::{estimate_cost, ModelPrice, PriceTable};

/// Which provider endpoint a model is served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointKind {
    /// `/chat/completions`, prompt sent as a single user message.
    #[default]
    Chat,
    /// Legacy `/completions`, prompt sent as-is.
    Text,
}

/// A model plus the sampling parameters used for one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub temperature: f64,
    pub max_completion_tokens: u32,
    #[serde(default)]
    pub endpoint: EndpointKind,
}

impl ModelSpec {
    pub fn new(
        model_id: impl Into<String>,
        temperature: f64,
        max_completion_tokens: u32,
        endpoint: EndpointKind,
    ) -> Result<Self, LlmError> {
        let spec = Self {
            model_id: model_id.into(),
            temperature,
            max_completion_tokens,
            endpoint,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.model_id.trim().is_empty() {
            return Err(LlmError::Configuration("model_id must not be empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::Configuration(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_completion_tokens == 0 {
            return Err(LlmError::Configuration(
                "max_completion_tokens must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Token counts reported for one or more completions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl TokenUsage {
    pub const fn new(prompt_tokens: u64, completion_tokens: u64) -> Self {
        Self {
            prompt_tokens,
            completion_tokens,
        }
    }

    pub fn total(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}

impl Add for TokenUsage {
    type Output = TokenUsage;

    fn add(self, rhs: TokenUsage) -> TokenUsage {
        TokenUsage {
            prompt_tokens: self.prompt_tokens + rhs.prompt_tokens,
            completion_tokens: self.completion_tokens + rhs.completion_tokens,
        }
    }
}

impl AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: TokenUsage) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for TokenUsage {
    fn sum<I: Iterator<Item = TokenUsage>>(iter: I) -> Self {
        iter.fold(TokenUsage::default(), Add::add)
    }
}

/// Pipeline stage a completion belongs to. Mocks key their scripts on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Sufficiency,
    Main,
    Removal,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Sufficiency => "sufficiency",
            Stage::Main => "main",
            Stage::Removal => "removal",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub stage: Stage,
    pub model: &'a ModelSpec,
    pub prompt: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    /// Timeouts, connection failures, 5xx responses. Retryable once.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The provider answered but the request cannot succeed (bad request,
    /// rate limited, malformed body, unscripted mock call).
    #[error("backend failure: {0}")]
    Backend(String),
    /// Bad credentials or invalid model/price configuration. Never retried.
    #[error("configuration error: {0}")]
    Configuration(String),
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LlmError::Transport(_))
    }
}

#[async_trait]
pub trait CompletionBackend: Send + Sync {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<Completion, LlmError>;
}

#[async_trait]
impl<T: CompletionBackend + ?Sized> CompletionBackend for std::sync::Arc<T> {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<Completion, LlmError> {
        (**self).complete(request).await
    }
}
