//! Deterministic scripted backend for tests and offline demos.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::{Completion, CompletionBackend, CompletionRequest, LlmError, Stage, TokenUsage};

/// Rough token estimate (4 characters per token) used when a script does not
/// pin usage explicitly.
pub fn approx_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

/// Hex SHA-256 of a prompt, the key used by [`ScriptedBackend::hashed`].
pub fn prompt_hash(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// One scripted answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reply {
    /// Reply text; usage is estimated from prompt and reply length.
    Text(String),
    /// Reply text with pinned usage.
    WithUsage(String, TokenUsage),
    Fail(LlmError),
}

impl Reply {
    pub fn text(text: impl Into<String>) -> Self {
        Reply::Text(text.into())
    }

    pub fn transport_failure() -> Self {
        Reply::Fail(LlmError::Transport("scripted transport failure".into()))
    }

    fn resolve(&self, prompt: &str) -> Result<Completion, LlmError> {
        match self {
            Reply::Text(text) => Ok(Completion {
                text: text.clone(),
                usage: TokenUsage::new(approx_tokens(prompt), approx_tokens(text)),
            }),
            Reply::WithUsage(text, usage) => Ok(Completion {
                text: text.clone(),
                usage: *usage,
            }),
            Reply::Fail(err) => Err(err.clone()),
        }
    }
}

impl From<&str> for Reply {
    fn from(text: &str) -> Self {
        Reply::text(text)
    }
}

impl From<String> for Reply {
    fn from(text: String) -> Self {
        Reply::Text(text)
    }
}

type Responder = dyn Fn(Stage, usize, &str) -> Reply + Send + Sync;

enum Script {
    /// Keyed on (stage, ordinal within stage).
    Staged(HashMap<Stage, Vec<Reply>>),
    /// Keyed on the SHA-256 of the full prompt. Strict: unknown prompts fail.
    Hashed(HashMap<String, Reply>),
    Responder(Arc<Responder>),
}

/// A completed call as seen by the mock.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub stage: Stage,
    pub ordinal: usize,
    pub model_id: String,
    pub temperature: f64,
    pub prompt: String,
    pub result: Result<Completion, LlmError>,
}

pub struct ScriptedBackend {
    script: Script,
    ordinals: [AtomicUsize; 3],
    transcript: Mutex<Vec<TranscriptEntry>>,
}

impl fmt::Debug for ScriptedBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScriptedBackend")
            .field("calls", &self.call_count())
            .finish_non_exhaustive()
    }
}

fn stage_slot(stage: Stage) -> usize {
    match stage {
        Stage::Sufficiency => 0,
        Stage::Main => 1,
        Stage::Removal => 2,
    }
}

impl ScriptedBackend {
    fn with_script(script: Script) -> Self {
        Self {
            script,
            ordinals: Default::default(),
            transcript: Mutex::new(Vec::new()),
        }
    }

    /// Empty staged script; add replies with [`ScriptedBackend::on`].
    pub fn staged() -> Self {
        Self::with_script(Script::Staged(HashMap::new()))
    }

    /// Scripts replies in call order for one stage.
    pub fn on<R: Into<Reply>>(mut self, stage: Stage, replies: impl IntoIterator<Item = R>) -> Self {
        if let Script::Staged(map) = &mut self.script {
            map.entry(stage)
                .or_default()
                .extend(replies.into_iter().map(Into::into));
        } else {
            panic!("ScriptedBackend::on only applies to staged scripts");
        }
        self
    }

    pub fn hashed<K: Into<String>, R: Into<Reply>>(entries: impl IntoIterator<Item = (K, R)>) -> Self {
        Self::with_script(Script::Hashed(
            entries
                .into_iter()
                .map(|(k, r)| (k.into(), r.into()))
                .collect(),
        ))
    }

    pub fn responder<F>(f: F) -> Self
    where
        F: Fn(Stage, usize, &str) -> Reply + Send + Sync + 'static,
    {
        Self::with_script(Script::Responder(Arc::new(f)))
    }

    /// A backend that answers any prompt with a plausible fence-free reply.
    /// Used by the demo server mode.
    pub fn canned() -> Self {
        Self::responder(|stage, _, prompt| match stage {
            Stage::Sufficiency => Reply::text(
                "You are asking for help understanding your code and the error you see. OK.",
            ),
            Stage::Main => Reply::text(
                "This is a canned offline response. Read the error message carefully, \
                 find the line it points to, and check which `names` and values are in use there.",
            ),
            Stage::Removal => Reply::Text(format!(
                "This is a canned offline rewrite of a {}-character response.",
                prompt.len()
            )),
        })
    }

    pub fn call_count(&self) -> usize {
        self.transcript.lock().expect("transcript lock").len()
    }

    pub fn calls_for(&self, stage: Stage) -> usize {
        self.transcript
            .lock()
            .expect("transcript lock")
            .iter()
            .filter(|e| e.stage == stage)
            .count()
    }

    pub fn transcript(&self) -> Vec<TranscriptEntry> {
        self.transcript.lock().expect("transcript lock").clone()
    }

    fn reply_for(&self, stage: Stage, ordinal: usize, prompt: &str) -> Result<Completion, LlmError> {
        let reply = match &self.script {
            Script::Staged(map) => map.get(&stage).and_then(|r| r.get(ordinal)).cloned(),
            Script::Hashed(map) => map.get(&prompt_hash(prompt)).cloned(),
            Script::Responder(f) => Some(f(stage, ordinal, prompt)),
        };
        match reply {
            Some(reply) => reply.resolve(prompt),
            None => Err(LlmError::Backend(format!(
                "no scripted reply for {stage} call #{ordinal}"
            ))),
        }
    }
}

#[async_trait]
impl CompletionBackend for ScriptedBackend {
    async fn complete(&self, request: CompletionRequest<'_>) -> Result<Completion, LlmError> {
        if request.prompt.is_empty() {
            return Err(LlmError::Backend("empty prompt".into()));
        }
        let ordinal = self.ordinals[stage_slot(request.stage)].fetch_add(1, Ordering::SeqCst);
        let result = self.reply_for(request.stage, ordinal, request.prompt);
        self.transcript
            .lock()
            .expect("transcript lock")
            .push(TranscriptEntry {
                stage: request.stage,
                ordinal,
                model_id: request.model.model_id.clone(),
                temperature: request.model.temperature,
                prompt: request.prompt.to_string(),
                result: result.clone(),
            });
        result
    }
}
