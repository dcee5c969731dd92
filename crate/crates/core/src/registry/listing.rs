use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::QueryRecord;
use crate::ids::UserId;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryFilter {
    pub user: Option<UserId>,
    /// Case-insensitive substring over code, error, issue and response text.
    pub text: Option<String>,
}

impl QueryFilter {
    pub fn matches(&self, record: &QueryRecord) -> bool {
        if self.user.as_ref().is_some_and(|u| *u != record.user_id) {
            return false;
        }
        let Some(needle) = self.text.as_deref().filter(|t| !t.is_empty()) else {
            return true;
        };
        let needle = needle.to_lowercase();
        let q = &record.query;
        let r = &record.response;
        [
            q.code(),
            q.error(),
            Some(q.issue()),
            Some(r.main_text.as_str()),
            r.clarification_text.as_deref(),
        ]
        .into_iter()
        .flatten()
        .any(|field| field.to_lowercase().contains(&needle))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortColumn {
    #[default]
    CreatedAt,
    User,
    Language,
    Issue,
    Helpful,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    #[default]
    Desc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortOrder {
    pub column: SortColumn,
    pub direction: Direction,
}

impl SortOrder {
    pub fn new(column: SortColumn, direction: Direction) -> Self {
        Self { column, direction }
    }

    fn compare(&self, a: &QueryRecord, b: &QueryRecord) -> Ordering {
        let ord = match self.column {
            SortColumn::CreatedAt => a.created_at.cmp(&b.created_at),
            SortColumn::User => a.user_id.cmp(&b.user_id),
            SortColumn::Language => a.query.language().cmp(b.query.language()),
            SortColumn::Issue => a.query.issue().cmp(b.query.issue()),
            SortColumn::Helpful => a.feedback.map(|f| f.helpful).cmp(&b.feedback.map(|f| f.helpful)),
        };
        match self.direction {
            Direction::Asc => ord,
            Direction::Desc => ord.reverse(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub offset: usize,
    pub limit: Option<usize>,
}

impl Page {
    pub const ALL: Page = Page { offset: 0, limit: None };

    pub fn new(offset: usize, limit: usize) -> Self {
        Self {
            offset,
            limit: Some(limit),
        }
    }
}

impl Default for Page {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPage {
    pub records: Vec<QueryRecord>,
    /// Matching records before pagination.
    pub total: usize,
}

/// Filter, stable sort (ties keep insertion order), then paginate.
pub(super) fn select(records: Vec<QueryRecord>, filter: &QueryFilter, order: SortOrder, page: Page) -> QueryPage {
    let mut matching: Vec<QueryRecord> = records.into_iter().filter(|r| filter.matches(r)).collect();
    matching.sort_by(|a, b| order.compare(a, b));
    let total = matching.len();
    let records = matching
        .into_iter()
        .skip(page.offset)
        .take(page.limit.unwrap_or(usize::MAX))
        .collect();
    QueryPage { records, total }
}
