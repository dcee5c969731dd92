use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("language must not be empty")]
    EmptyLanguage,
    #[error("issue must not be empty")]
    EmptyIssue,
}

/// A student's request for help: language, optional code, optional error
/// message, and the issue or question itself.
///
/// Code and error fields that are empty or whitespace-only are stored as
/// absent. Non-empty values are kept byte-for-byte.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawHelpQuery", into = "RawHelpQuery")]
pub struct HelpQuery {
    language: String,
    code: Option<String>,
    error: Option<String>,
    issue: String,
}

#[derive(Serialize, Deserialize)]
struct RawHelpQuery {
    language: String,
    #[serde(default)]
    code: Option<String>,
    #[serde(default)]
    error: Option<String>,
    issue: String,
}

fn present(field: Option<String>) -> Option<String> {
    field.filter(|s| !s.trim().is_empty())
}

impl HelpQuery {
    pub fn new(
        language: impl Into<String>,
        code: Option<String>,
        error: Option<String>,
        issue: impl Into<String>,
    ) -> Result<Self, QueryError> {
        let language = language.into();
        let issue = issue.into();
        if language.trim().is_empty() {
            return Err(QueryError::EmptyLanguage);
        }
        if issue.trim().is_empty() {
            return Err(QueryError::EmptyIssue);
        }
        Ok(Self {
            language,
            code: present(code),
            error: present(error),
            issue,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn code(&self) -> Option<&str> {
        self.code.as_deref()
    }

    pub fn error(&self) -> Option<&str> {
        self.error.as_deref()
    }

    pub fn issue(&self) -> &str {
        &self.issue
    }

    /// Same query with the issue replaced.
    pub fn with_issue(&self, issue: impl Into<String>) -> Result<Self, QueryError> {
        Self::new(
            self.language.clone(),
            self.code.clone(),
            self.error.clone(),
            issue,
        )
    }
}

impl TryFrom<RawHelpQuery> for HelpQuery {
    type Error = QueryError;

    fn try_from(raw: RawHelpQuery) -> Result<Self, Self::Error> {
        HelpQuery::new(raw.language, raw.code, raw.error, raw.issue)
    }
}

impl From<HelpQuery> for RawHelpQuery {
    fn from(q: HelpQuery) -> Self {
        RawHelpQuery {
            language: q.language,
            code: q.code,
            error: q.error,
            issue: q.issue,
        }
    }
}
