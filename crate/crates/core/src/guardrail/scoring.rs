use regex::{RegexSet, RegexSetBuilder};
use serde::{Deserialize, Serialize};

use super::fences::detect_code_blocks;

/// Any code block costs more than every possible keyword count.
pub const CODE_BLOCK_PENALTY: i64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionCandidate {
    pub text: String,
    pub code_block_count: usize,
    pub avoided_keyword_hits: usize,
    pub score: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cannot select from an empty candidate list")]
pub struct EmptyCandidates;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Edges of the keyword that are word characters must sit on a word
/// boundary, so `sum` matches `Sum` and `sum(` but not `summary`.
fn keyword_pattern(keyword: &str) -> Option<String> {
    let (first, last) = (keyword.chars().next()?, keyword.chars().last()?);
    let mut pattern = String::new();
    if is_word_char(first) {
        pattern.push_str(r"\b");
    }
    pattern.push_str(&regex::escape(keyword));
    if is_word_char(last) {
        pattern.push_str(r"\b");
    }
    Some(pattern)
}

/// A compiled avoid set. Build once per query and reuse it for every
/// candidate.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    set: RegexSet,
}

impl KeywordMatcher {
    pub fn new<S: AsRef<str>>(avoid_set: &[S]) -> Self {
        let mut seen: Vec<String> = Vec::new();
        let mut patterns = Vec::new();
        for keyword in avoid_set {
            let keyword = keyword.as_ref().trim();
            let lowered = keyword.to_lowercase();
            if seen.contains(&lowered) {
                continue;
            }
            if let Some(p) = keyword_pattern(keyword) {
                seen.push(lowered);
                patterns.push(p);
            }
        }
        let set = RegexSetBuilder::new(patterns)
            .case_insensitive(true)
            .size_limit(64 << 20)
            .build()
            .expect("escaped keywords always form a valid pattern");
        Self { set }
    }

    /// Number of distinct keywords present in `text`.
    pub fn count(&self, text: &str) -> usize {
        self.set.matches(text).iter().count()
    }
}

/// Whether `keyword` occurs in `text`, ignoring case.
pub fn contains_keyword(text: &str, keyword: &str) -> bool {
    KeywordMatcher::new(&[keyword]).count(text) > 0
}

/// Number of distinct avoid-set entries that appear in `text`.
pub fn count_avoided_keywords<S: AsRef<str>>(text: &str, avoid_set: &[S]) -> usize {
    KeywordMatcher::new(avoid_set).count(text)
}

pub fn score_candidate<S: AsRef<str>>(text: &str, avoid_set: &[S]) -> CompletionCandidate {
    score_with(text, &KeywordMatcher::new(avoid_set))
}

pub fn score_with(text: &str, matcher: &KeywordMatcher) -> CompletionCandidate {
    let code_block_count = detect_code_blocks(text);
    let avoided_keyword_hits = matcher.count(text);
    let score = -(CODE_BLOCK_PENALTY * i64::from(code_block_count > 0)) - avoided_keyword_hits as i64;
    CompletionCandidate {
        text: text.to_string(),
        code_block_count,
        avoided_keyword_hits,
        score,
    }
}

/// Highest-scoring candidate; the earliest one wins ties.
pub fn select_best(candidates: &[CompletionCandidate]) -> Result<&CompletionCandidate, EmptyCandidates> {
    let mut best: Option<&CompletionCandidate> = None;
    for candidate in candidates {
        if best.is_none_or(|b| candidate.score > b.score) {
            best = Some(candidate);
        }
    }
    best.ok_or(EmptyCandidates)
}
