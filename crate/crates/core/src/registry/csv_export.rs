use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};

use super::{QueryRecord, RegistryError};

pub const CSV_HEADER: [&str; 10] = [
    "query_id",
    "created_at",
    "user",
    "language",
    "code",
    "error",
    "issue",
    "response_text",
    "clarification",
    "helpful",
];

/// One exported row. Absent values are empty strings; `helpful` is `true`,
/// `false` or empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvRow {
    pub query_id: String,
    pub created_at: String,
    pub user: String,
    pub language: String,
    pub code: String,
    pub error: String,
    pub issue: String,
    pub response_text: String,
    pub clarification: String,
    pub helpful: String,
}

impl CsvRow {
    pub fn from_record(r: &QueryRecord) -> Self {
        Self {
            query_id: r.query_id.to_string(),
            created_at: r.created_at.to_rfc3339_opts(SecondsFormat::Micros, true),
            user: r.user_id.to_string(),
            language: r.query.language().to_string(),
            code: r.query.code().unwrap_or_default().to_string(),
            error: r.query.error().unwrap_or_default().to_string(),
            issue: r.query.issue().to_string(),
            response_text: r.response.main_text.clone(),
            clarification: r.response.clarification_text.clone().unwrap_or_default(),
            helpful: r.feedback.map(|f| f.helpful.to_string()).unwrap_or_default(),
        }
    }

    pub fn fields(&self) -> [&str; 10] {
        [
            &self.query_id,
            &self.created_at,
            &self.user,
            &self.language,
            &self.code,
            &self.error,
            &self.issue,
            &self.response_text,
            &self.clarification,
            &self.helpful,
        ]
    }
}

/// RFC 4180: CRLF record terminator, fields quoted only when they contain a
/// comma, quote, CR or LF.
pub(super) fn write_csv(records: &[QueryRecord]) -> Result<Vec<u8>, RegistryError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let io = |e: csv::Error| RegistryError::Storage(format!("csv encoding failed: {e}"));
    writer.write_record(CSV_HEADER).map_err(io)?;
    for record in records {
        writer.write_record(CsvRow::from_record(record).fields()).map_err(io)?;
    }
    writer
        .into_inner()
        .map_err(|e| RegistryError::Storage(format!("csv flush failed: {e}")))
}
