//! Core of the CodeHelp service: the guardrailed help pipeline, the completion
//! gateway, the class registry, LTI launch verification, session tokens, and
//! usage analytics.

pub mod analytics;
pub mod class;
pub mod guardrail;
pub mod ids;
pub mod llm;
pub mod lti;
pub mod query;
pub mod registry;
pub mod session;

pub use class::{AvoidSet, ClassConfig, ConfigError, Role};
pub use guardrail::{run_pipeline, GuardedResponse, Pipeline, PipelineError, PipelineModels};
pub use ids::{ClassId, QueryId, UserId};
pub use llm::{CompletionBackend, LlmError, ModelSpec, Stage, TokenUsage};
pub use query::{HelpQuery, QueryError};
