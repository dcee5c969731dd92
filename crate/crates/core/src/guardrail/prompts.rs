//! Prompt templates for the three completion stages.
//!
//! Templates live in `templates/<version>/` as plain text with `{{name}}`
//! placeholders. Substitution is single-pass, so placeholder-looking text in a
//! student's input is never expanded.

use crate::query::HelpQuery;

pub const TEMPLATE_VERSION: &str = "v1";

const SUFFICIENCY_TEMPLATE: &str = include_str!("../../templates/v1/sufficiency.txt");
const MAIN_TEMPLATE: &str = include_str!("../../templates/v1/main.txt");
const REMOVAL_TEMPLATE: &str = include_str!("../../templates/v1/removal.txt");

pub const NO_CODE_SENTENCE: &str = "Please do not write any example code in your response.";

/// Placeholder for absent optional fields.
pub const NONE_PROVIDED: &str = "[none provided]";

const AVOID_PREFIX: &str = "Do not use or mention any of the following in your response: ";

fn template_body(raw: &'static str) -> &'static str {
    raw.strip_suffix('\n').unwrap_or(raw)
}

fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .unwrap_or_else(|| panic!("unterminated placeholder in template"));
        let name = &after[..end];
        let value = values
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("no value for template placeholder {name:?}"));
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

fn query_values(query: &HelpQuery) -> [(&'static str, &str); 4] {
    [
        ("language", query.language()),
        ("code", query.code().unwrap_or(NONE_PROVIDED)),
        ("error", query.error().unwrap_or(NONE_PROVIDED)),
        ("issue", query.issue()),
    ]
}

/// Appends the no-example-code request to a student's issue.
pub fn augment_issue(issue: &str) -> String {
    if issue.is_empty() || issue.ends_with(char::is_whitespace) {
        format!("{issue}{NO_CODE_SENTENCE}")
    } else {
        format!("{issue} {NO_CODE_SENTENCE}")
    }
}

pub fn render_sufficiency_prompt(query: &HelpQuery) -> String {
    render(template_body(SUFFICIENCY_TEMPLATE), &query_values(query))
}

/// Sentence listing the avoid set, or `None` when there is nothing to avoid.
pub fn avoid_sentence<S: AsRef<str>>(avoid_set: &[S]) -> Option<String> {
    if avoid_set.is_empty() {
        return None;
    }
    let list = avoid_set
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(", ");
    Some(format!("{AVOID_PREFIX}{list}."))
}

/// Main-response prompt. `query.issue()` is expected to already carry the
/// sentence added by [`augment_issue`].
pub fn render_main_prompt<S: AsRef<str>>(query: &HelpQuery, avoid_set: &[S]) -> String {
    let avoid = avoid_sentence(avoid_set)
        .map(|s| format!("{s}\n\n"))
        .unwrap_or_default();
    let [lang, code, error, issue] = query_values(query);
    render(
        template_body(MAIN_TEMPLATE),
        &[lang, code, error, issue, ("avoid_instructions", &avoid)],
    )
}

pub fn render_removal_prompt(original: &str) -> String {
    render(template_body(REMOVAL_TEMPLATE), &[("original", original)])
}
