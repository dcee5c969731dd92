use serde::{Deserialize, Serialize};

/// Shown when the sufficiency completion comes back empty.
pub const FALLBACK_CLARIFICATION: &str =
    "Please provide more detail about your code, error, and question.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SufficiencyVerdict {
    pub sufficient: bool,
    pub clarification_text: Option<String>,
    pub raw_completion: String,
}

impl SufficiencyVerdict {
    /// Verdict used when the sufficiency check itself could not run.
    pub fn assumed_sufficient() -> Self {
        Self {
            sufficient: true,
            clarification_text: None,
            raw_completion: String::new(),
        }
    }
}

/// A completion is sufficient when its last whitespace-separated token is
/// exactly `OK.` or `OK`. Otherwise the whole trimmed completion is the
/// clarification request.
pub fn parse_sufficiency(completion: &str) -> SufficiencyVerdict {
    let trimmed = completion.trim();
    let sufficient = matches!(trimmed.split_whitespace().last(), Some("OK." | "OK"));
    let clarification_text = match (sufficient, trimmed.is_empty()) {
        (true, _) => None,
        (false, true) => Some(FALLBACK_CLARIFICATION.to_string()),
        (false, false) => Some(trimmed.to_string()),
    };
    SufficiencyVerdict {
        sufficient,
        clarification_text,
        raw_completion: completion.to_string(),
    }
}
