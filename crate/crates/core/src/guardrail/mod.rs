//! Guardrailed response generation.
//!
//! One help query fans out into three concurrent completions: a sufficiency
//! check and two independent main-response samples. The better-scoring main
//! sample is kept; if it contains a fenced code block, a fourth completion
//! rewrites it without code.

pub mod fences;
pub mod prompts;
pub mod scoring;
pub mod sufficiency;

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::class::ClassConfig;
use crate::llm::{CompletionBackend, CompletionRequest, EndpointKind, LlmError, ModelSpec, Stage, TokenUsage};
use crate::query::HelpQuery;

pub use fences::detect_code_blocks;
pub use prompts::{augment_issue, render_main_prompt, render_removal_prompt, render_sufficiency_prompt};
pub use scoring::{count_avoided_keywords, score_candidate, score_with, select_best, CompletionCandidate, KeywordMatcher};
pub use sufficiency::{parse_sufficiency, SufficiencyVerdict};

/// Delivered instead of a code-bearing response when the rewrite fails.
pub const REMOVAL_FAILED_TEXT: &str = "Sorry, a response to your request could not be prepared \
without including example code. Please try again, or ask your instructor or TA for help.";

/// Model settings for each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModels {
    pub sufficiency: ModelSpec,
    pub main: ModelSpec,
    pub removal: ModelSpec,
}

impl Default for PipelineModels {
    fn default() -> Self {
        Self {
            sufficiency: ModelSpec {
                model_id: "gpt-3.5-turbo-0301".into(),
                temperature: 0.0,
                max_completion_tokens: 600,
                endpoint: EndpointKind::Chat,
            },
            main: ModelSpec {
                model_id: "gpt-3.5-turbo-0301".into(),
                temperature: 0.7,
                max_completion_tokens: 1000,
                endpoint: EndpointKind::Chat,
            },
            removal: ModelSpec {
                model_id: "text-davinci-003".into(),
                temperature: 0.0,
                max_completion_tokens: 1000,
                endpoint: EndpointKind::Text,
            },
        }
    }
}

impl PipelineModels {
    pub fn validate(&self) -> Result<(), LlmError> {
        self.sufficiency.validate()?;
        self.main.validate()?;
        self.removal.validate()
    }
}

/// Usage of one completion, attributed to the model that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageUsage {
    pub stage: Stage,
    pub model_id: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedResponse {
    pub query_echo: HelpQuery,
    pub main_text: String,
    pub clarification_text: Option<String>,
    pub code_removal_applied: bool,
    pub candidate_scores: Vec<i64>,
    /// Sum over every completion that returned.
    pub usage: TokenUsage,
    pub usage_by_stage: Vec<StageUsage>,
    pub created_at: DateTime<Utc>,
}

impl GuardedResponse {
    /// `(model_id, usage)` pairs in the shape cost estimation expects.
    pub fn model_usages(&self) -> Vec<(String, TokenUsage)> {
        self.usage_by_stage
            .iter()
            .map(|s| (s.model_id.clone(), s.usage))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("main response generation failed: {0}")]
    MainCompletion(#[source] LlmError),
}

struct Run<'a> {
    backend: &'a dyn CompletionBackend,
    usage: Vec<StageUsage>,
}

impl Run<'_> {
    fn record(&mut self, stage: Stage, model: &ModelSpec, usage: TokenUsage) {
        self.usage.push(StageUsage {
            stage,
            model_id: model.model_id.clone(),
            usage,
        });
    }
}

/// Runs the full workflow for one query. Configuration is only read.
pub async fn run_pipeline(
    query: &HelpQuery,
    config: &ClassConfig,
    backend: &dyn CompletionBackend,
    models: &PipelineModels,
) -> Result<GuardedResponse, PipelineError> {
    let avoid = config.avoid_set.as_slice();
    let sufficiency_prompt = render_sufficiency_prompt(query);
    let main_query = query
        .with_issue(augment_issue(query.issue()))
        .expect("augmenting keeps the issue non-empty");
    let main_prompt = render_main_prompt(&main_query, avoid);

    let request = |stage, model, prompt| CompletionRequest { stage, model, prompt };
    let (sufficiency, first, second) = tokio::join!(
        backend.complete(request(Stage::Sufficiency, &models.sufficiency, &sufficiency_prompt)),
        backend.complete(request(Stage::Main, &models.main, &main_prompt)),
        backend.complete(request(Stage::Main, &models.main, &main_prompt)),
    );

    let mut run = Run { backend, usage: Vec::new() };

    let verdict = match sufficiency {
        Ok(done) => {
            run.record(Stage::Sufficiency, &models.sufficiency, done.usage);
            parse_sufficiency(&done.text)
        }
        Err(err) => {
            tracing::warn!(error = %err, "sufficiency check failed; treating query as sufficient");
            SufficiencyVerdict::assumed_sufficient()
        }
    };

    let matcher = KeywordMatcher::new(avoid);
    let mut candidates = Vec::with_capacity(2);
    for outcome in [first, second] {
        let done = outcome.map_err(PipelineError::MainCompletion)?;
        run.record(Stage::Main, &models.main, done.usage);
        candidates.push(score_with(&done.text, &matcher));
    }
    let best = select_best(&candidates).expect("two candidates");

    let code_removal_applied = best.code_block_count > 0;
    let main_text = if code_removal_applied {
        let prompt = render_removal_prompt(&best.text);
        match run
            .backend
            .complete(request(Stage::Removal, &models.removal, &prompt))
            .await
        {
            Ok(done) => {
                run.record(Stage::Removal, &models.removal, done.usage);
                done.text
            }
            Err(err) => {
                tracing::warn!(error = %err, "code removal failed; withholding response");
                REMOVAL_FAILED_TEXT.to_string()
            }
        }
    } else {
        best.text.clone()
    };

    Ok(GuardedResponse {
        query_echo: query.clone(),
        main_text,
        clarification_text: verdict.clarification_text,
        code_removal_applied,
        candidate_scores: candidates.iter().map(|c| c.score).collect(),
        usage: run.usage.iter().map(|s| s.usage).sum(),
        usage_by_stage: run.usage,
        created_at: Utc::now(),
    })
}

/// A backend paired with its stage models.
#[derive(Clone)]
pub struct Pipeline {
    backend: Arc<dyn CompletionBackend>,
    models: PipelineModels,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline").field("models", &self.models).finish_non_exhaustive()
    }
}

impl Pipeline {
    pub fn new(backend: Arc<dyn CompletionBackend>, models: PipelineModels) -> Self {
        Self { backend, models }
    }

    pub fn models(&self) -> &PipelineModels {
        &self.models
    }

    pub async fn run(&self, query: &HelpQuery, config: &ClassConfig) -> Result<GuardedResponse, PipelineError> {
        run_pipeline(query, config, self.backend.as_ref(), &self.models).await
    }
}
