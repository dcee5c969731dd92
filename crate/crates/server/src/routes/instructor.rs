use axum::extract::State;
use axum::http::header::{CONTENT_DISPOSITION, CONTENT_TYPE};
use axum::response::IntoResponse;
use axum::Json;
use chrono::{NaiveDate, Utc};
use codehelp_core::registry::{Direction, Page, Principal, QueryFilter, QueryPage, SortColumn, SortOrder, UserCount};
use codehelp_core::{AvoidSet, ClassConfig, UserId};
use serde::Deserialize;

use crate::auth::Staff;
use crate::error::ApiError;
use crate::extract::{ApiJson, ApiQuery};
use crate::state::AppState;

const DEFAULT_PAGE_SIZE: usize = 50;
const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, Deserialize)]
pub struct ListParams {
    pub user: Option<String>,
    pub text: Option<String>,
    #[serde(default)]
    pub sort: SortColumn,
    #[serde(default)]
    pub dir: Direction,
    #[serde(default)]
    pub offset: usize,
    pub limit: Option<usize>,
}

pub async fn queries(
    State(state): State<AppState>,
    Staff(session): Staff,
    ApiQuery(params): ApiQuery<ListParams>,
) -> Result<Json<QueryPage>, ApiError> {
    let limit = params.limit.unwrap_or(DEFAULT_PAGE_SIZE);
    if limit == 0 || limit > MAX_PAGE_SIZE {
        return Err(ApiError::validation(format!("limit must be between 1 and {MAX_PAGE_SIZE}")));
    }
    let filter = QueryFilter {
        user: params.user.filter(|u| !u.is_empty()).map(UserId::new),
        text: params.text,
    };
    let order = SortOrder::new(params.sort, params.dir);
    let page = Page::new(params.offset, limit);
    let listing = state
        .with_registry(move |reg| {
            Ok(reg.list_queries(Principal::User(&session.user_id), &session.class_id, &filter, order, page)?)
        })
        .await?;
    Ok(Json(listing))
}

pub async fn users(State(state): State<AppState>, Staff(session): Staff) -> Result<Json<Vec<UserCount>>, ApiError> {
    let counts = state
        .with_registry(move |reg| Ok(reg.user_counts(Principal::User(&session.user_id), &session.class_id, Utc::now())?))
        .await?;
    Ok(Json(counts))
}

pub async fn export(State(state): State<AppState>, Staff(session): Staff) -> Result<impl IntoResponse, ApiError> {
    let bytes = state
        .with_registry(move |reg| Ok(reg.export_csv(Principal::User(&session.user_id), &session.class_id)?))
        .await?;
    Ok((
        [
            (CONTENT_TYPE, "text/csv; charset=utf-8"),
            (CONTENT_DISPOSITION, "attachment; filename=\"queries.csv\""),
        ],
        bytes,
    ))
}

pub async fn get_config(State(state): State<AppState>, Staff(session): Staff) -> Result<Json<ClassConfig>, ApiError> {
    let config = state
        .with_registry(move |reg| Ok(reg.get_class_config(Principal::User(&session.user_id), &session.class_id)?))
        .await?;
    Ok(Json(config))
}

/// Editable fields. Omitted optional fields keep their stored values.
#[derive(Debug, Deserialize)]
pub struct ConfigUpdate {
    pub name: Option<String>,
    pub default_language: Option<String>,
    pub avoid_set: Option<Vec<String>>,
    pub timezone: Option<String>,
    #[serde(default, deserialize_with = "explicit_option")]
    pub term_start: Option<Option<NaiveDate>>,
}

/// Distinguishes an explicit `null` (clear the value) from an absent field.
fn explicit_option<'de, D>(de: D) -> Result<Option<Option<NaiveDate>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<NaiveDate>::deserialize(de).map(Some)
}

pub async fn put_config(
    State(state): State<AppState>,
    Staff(session): Staff,
    ApiJson(update): ApiJson<ConfigUpdate>,
) -> Result<Json<ClassConfig>, ApiError> {
    let avoid_set = update.avoid_set.map(AvoidSet::new).transpose()?;
    let config = state
        .with_registry(move |reg| {
            let principal = Principal::User(&session.user_id);
            let mut config = reg.get_class_config(principal, &session.class_id)?;
            if let Some(name) = update.name {
                config.name = name;
            }
            if let Some(language) = update.default_language {
                config.default_language = language;
            }
            if let Some(avoid) = avoid_set {
                config.avoid_set = avoid;
            }
            if let Some(tz) = update.timezone {
                config.timezone = tz;
            }
            if let Some(start) = update.term_start {
                config.term_start = start;
            }
            reg.update_class_config(principal, &config)?;
            Ok(config)
        })
        .await?;
    Ok(Json(config))
}
