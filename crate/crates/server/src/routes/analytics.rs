use axum::extract::State;
use axum::http::header::CONTENT_TYPE;
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::NaiveDate;
use codehelp_core::analytics::{self, AnalyticsError};
use codehelp_core::registry::{ClassActivity, Principal};
use serde::{Deserialize, Serialize};

use crate::auth::Staff;
use crate::error::ApiError;
use crate::extract::ApiQuery;
use crate::state::AppState;

const DEFAULT_WEEKS: u32 = 12;
const MAX_WEEKS: u32 = 104;
const DEFAULT_THRESHOLDS: [u64; 3] = [10, 30, 100];

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn respond<T: Serialize>(format: Format, value: T, csv: impl FnOnce(&T) -> String) -> Response {
    match format {
        Format::Json => Json(value).into_response(),
        Format::Csv => ([(CONTENT_TYPE, "text/csv; charset=utf-8")], csv(&value)).into_response(),
    }
}

async fn activity(state: &AppState, session: codehelp_core::session::Session) -> Result<ClassActivity, ApiError> {
    state
        .with_registry(move |reg| Ok(reg.class_activity(Principal::User(&session.user_id), &session.class_id)?))
        .await
}

#[derive(Debug, Deserialize)]
pub struct WeeklyParams {
    /// Defaults to the class's configured term start.
    pub term_start: Option<NaiveDate>,
    pub weeks: Option<u32>,
    #[serde(default)]
    pub format: Format,
}

pub async fn weekly(
    State(state): State<AppState>,
    Staff(session): Staff,
    ApiQuery(params): ApiQuery<WeeklyParams>,
) -> Result<Response, ApiError> {
    let weeks = params.weeks.unwrap_or(DEFAULT_WEEKS);
    if weeks > MAX_WEEKS {
        return Err(ApiError::validation(format!("weeks must be at most {MAX_WEEKS}")));
    }
    let activity = activity(&state, session).await?;
    let term_start = params
        .term_start
        .or(activity.config.term_start)
        .ok_or_else(|| ApiError::validation("no term start given and none configured for the class"))?;
    let points = match activity.weekly(term_start, weeks) {
        // A class nobody has joined yet has nothing to report.
        Err(AnalyticsError::EmptyRoster) => Vec::new(),
        other => other?,
    };
    Ok(respond(params.format, points, |p| analytics::csv::weekly(p)))
}

#[derive(Debug, Deserialize)]
pub struct HeatmapParams {
    /// IANA zone; defaults to the class timezone.
    pub tz: Option<String>,
    #[serde(default)]
    pub format: Format,
}

pub async fn heatmap(
    State(state): State<AppState>,
    Staff(session): Staff,
    ApiQuery(params): ApiQuery<HeatmapParams>,
) -> Result<Response, ApiError> {
    let activity = activity(&state, session).await?;
    let map = activity.heatmap(params.tz.as_deref())?;
    Ok(respond(params.format, map, analytics::csv::heatmap))
}

#[derive(Debug, Deserialize)]
pub struct IntensityParams {
    /// Comma-separated query-count thresholds.
    pub thresholds: Option<String>,
    #[serde(default)]
    pub format: Format,
}

fn parse_thresholds(raw: Option<&str>) -> Result<Vec<u64>, ApiError> {
    let Some(raw) = raw.filter(|r| !r.trim().is_empty()) else {
        return Ok(DEFAULT_THRESHOLDS.to_vec());
    };
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| ApiError::validation(format!("threshold {t:?} is not a non-negative integer")))
        })
        .collect()
}

pub async fn intensity(
    State(state): State<AppState>,
    Staff(session): Staff,
    ApiQuery(params): ApiQuery<IntensityParams>,
) -> Result<Response, ApiError> {
    let thresholds = parse_thresholds(params.thresholds.as_deref())?;
    let activity = activity(&state, session).await?;
    let buckets = activity.intensity(&thresholds);
    Ok(respond(params.format, buckets, |b| analytics::csv::intensity(b)))
}
