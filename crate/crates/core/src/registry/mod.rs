//! Persistent store for users, classes, memberships and help queries.
//!
//! Backed by a single SQLite file. All mutations run inside a transaction on a
//! connection guarded by a mutex, so concurrent writers serialize and readers
//! never see half-written records.

mod csv_export;
mod listing;

use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rusqlite::{params, Connection, OptionalExtension, Transaction};
use serde::{Deserialize, Serialize};

use crate::class::{ClassConfig, ConfigError, Role};
use crate::guardrail::GuardedResponse;
use crate::ids::{ClassId, QueryId, UserId};
use crate::query::HelpQuery;

pub use csv_export::{CsvRow, CSV_HEADER};
pub use listing::{Direction, Page, QueryFilter, QueryPage, SortColumn, SortOrder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("{0} not found")]
    NotFound(String),
    #[error("not authorized: {0}")]
    Authorization(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl From<rusqlite::Error> for RegistryError {
    fn from(e: rusqlite::Error) -> Self {
        RegistryError::Storage(e.to_string())
    }
}

impl From<serde_json::Error> for RegistryError {
    fn from(e: serde_json::Error) -> Self {
        RegistryError::Storage(format!("corrupt stored record: {e}"))
    }
}

impl From<ConfigError> for RegistryError {
    fn from(e: ConfigError) -> Self {
        RegistryError::Validation(e.to_string())
    }
}

type Result<T, E = RegistryError> = std::result::Result<T, E>;

/// Who is asking. Operators (the CLI working on a local database file) bypass
/// class role checks; HTTP requests always arrive as a [`Principal::User`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Principal<'a> {
    User(&'a UserId),
    Operator,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LmsIdentity {
    pub consumer: String,
    pub context: String,
    pub subject: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub user_id: UserId,
    pub display_name: String,
    pub lms_identity: Option<LmsIdentity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub helpful: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: QueryId,
    pub class_id: ClassId,
    pub user_id: UserId,
    pub query: HelpQuery,
    pub response: GuardedResponse,
    pub feedback: Option<Feedback>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserCount {
    pub user_id: UserId,
    pub display_name: String,
    pub total: u64,
    pub past_week: u64,
}

/// Everything the analytics need about a class: the student roster and the
/// author and time of every query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassActivity {
    pub config: ClassConfig,
    pub roster: Vec<UserId>,
    pub events: Vec<(UserId, DateTime<Utc>)>,
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS users (
    user_id      TEXT PRIMARY KEY,
    display_name TEXT NOT NULL,
    lms_json     TEXT
);
CREATE TABLE IF NOT EXISTS classes (
    class_id    TEXT PRIMARY KEY,
    config_json TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS memberships (
    class_id TEXT NOT NULL REFERENCES classes(class_id),
    user_id  TEXT NOT NULL REFERENCES users(user_id),
    role     TEXT NOT NULL,
    PRIMARY KEY (class_id, user_id)
);
CREATE TABLE IF NOT EXISTS queries (
    seq           INTEGER PRIMARY KEY AUTOINCREMENT,
    query_id      TEXT NOT NULL UNIQUE,
    class_id      TEXT NOT NULL REFERENCES classes(class_id),
    user_id       TEXT NOT NULL REFERENCES users(user_id),
    query_json    TEXT NOT NULL,
    response_json TEXT NOT NULL,
    helpful       INTEGER,
    created_us    INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS queries_by_class ON queries(class_id, seq);
";

fn to_micros(t: DateTime<Utc>) -> i64 {
    t.timestamp_micros()
}

fn from_micros(us: i64) -> DateTime<Utc> {
    Utc.timestamp_micros(us).single().expect("stored timestamp in range")
}

pub struct Registry {
    conn: Mutex<Connection>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry").finish_non_exhaustive()
    }
}

impl Registry {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        Self::init(conn)
    }

    pub fn open_in_memory() -> Result<Self> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(conn: Connection) -> Result<Self> {
        conn.pragma_update(None, "foreign_keys", "ON")?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self {
            conn: Mutex::new(conn),
        })
    }

    fn lock(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn write<T>(&self, f: impl FnOnce(&Transaction<'_>) -> Result<T>) -> Result<T> {
        let mut conn = self.lock();
        let tx = conn.transaction()?;
        let out = f(&tx)?;
        tx.commit()?;
        Ok(out)
    }

    fn read<T>(&self, f: impl FnOnce(&Connection) -> Result<T>) -> Result<T> {
        let conn = self.lock();
        f(&conn)
    }

    // -- users and classes -------------------------------------------------

    pub fn upsert_user(&self, user: &User) -> Result<()> {
        let lms = user.lms_identity.as_ref().map(serde_json::to_string).transpose()?;
        self.write(|tx| {
            tx.execute(
                "INSERT INTO users (user_id, display_name, lms_json) VALUES (?1, ?2, ?3)
                 ON CONFLICT(user_id) DO UPDATE SET display_name = ?2, lms_json = ?3",
                params![user.user_id.as_str(), user.display_name, lms],
            )?;
            Ok(())
        })
    }

    pub fn get_user(&self, user_id: &UserId) -> Result<User> {
        self.read(|c| {
            let row = c
                .query_row(
                    "SELECT display_name, lms_json FROM users WHERE user_id = ?1",
                    [user_id.as_str()],
                    |r| Ok((r.get::<_, String>(0)?, r.get::<_, Option<String>>(1)?)),
                )
                .optional()?
                .ok_or_else(|| RegistryError::NotFound(format!("user {user_id}")))?;
            Ok(User {
                user_id: user_id.clone(),
                display_name: row.0,
                lms_identity: row.1.as_deref().map(serde_json::from_str).transpose()?,
            })
        })
    }

    /// Creates the class if it does not exist. Returns whether it was created.
    pub fn ensure_class(&self, config: &ClassConfig) -> Result<bool> {
        config.validate()?;
        let json = serde_json::to_string(config)?;
        self.write(|tx| {
            let n = tx.execute(
                "INSERT OR IGNORE INTO classes (class_id, config_json) VALUES (?1, ?2)",
                params![config.class_id.as_str(), json],
            )?;
            Ok(n == 1)
        })
    }

    pub fn class_exists(&self, class_id: &ClassId) -> Result<bool> {
        self.read(|c| Ok(class_config(c, class_id)?.is_some()))
    }

    pub fn get_class_config(&self, principal: Principal<'_>, class_id: &ClassId) -> Result<ClassConfig> {
        self.read(|c| {
            require_member(c, principal, class_id)?;
            class_config(c, class_id)?.ok_or_else(|| RegistryError::NotFound(format!("class {class_id}")))
        })
    }

    /// Replaces a class's configuration. Staff only.
    pub fn update_class_config(&self, principal: Principal<'_>, config: &ClassConfig) -> Result<()> {
        config.validate()?;
        let json = serde_json::to_string(config)?;
        self.write(|tx| {
            require_staff(tx, principal, &config.class_id)?;
            let n = tx.execute(
                "UPDATE classes SET config_json = ?2 WHERE class_id = ?1",
                params![config.class_id.as_str(), json],
            )?;
            if n == 0 {
                return Err(RegistryError::NotFound(format!("class {}", config.class_id)));
            }
            Ok(())
        })
    }

    pub fn set_membership(&self, class_id: &ClassId, user_id: &UserId, role: Role) -> Result<()> {
        self.write(|tx| {
            ensure_class_and_user(tx, class_id, user_id)?;
            tx.execute(
                "INSERT INTO memberships (class_id, user_id, role) VALUES (?1, ?2, ?3)
                 ON CONFLICT(class_id, user_id) DO UPDATE SET role = ?3",
                params![class_id.as_str(), user_id.as_str(), role.as_str()],
            )?;
            Ok(())
        })
    }

    pub fn role_of(&self, class_id: &ClassId, user_id: &UserId) -> Result<Option<Role>> {
        self.read(|c| membership(c, class_id, user_id))
    }

    // -- queries -----------------------------------------------------------

    pub fn save_query(
        &self,
        class_id: &ClassId,
        user_id: &UserId,
        query: &HelpQuery,
        response: &GuardedResponse,
    ) -> Result<QueryId> {
        self.save_query_at(class_id, user_id, query, response, Utc::now())
    }

    /// Saves with an explicit timestamp. Timestamps are kept non-decreasing
    /// per class in insertion order: an earlier `created_at` than the class's
    /// latest record is raised to that record's time.
    pub fn save_query_at(
        &self,
        class_id: &ClassId,
        user_id: &UserId,
        query: &HelpQuery,
        response: &GuardedResponse,
        created_at: DateTime<Utc>,
    ) -> Result<QueryId> {
        let query_json = serde_json::to_string(query)?;
        let response_json = serde_json::to_string(response)?;
        self.write(|tx| {
            ensure_class_and_user(tx, class_id, user_id)?;
            if membership(tx, class_id, user_id)?.is_none() {
                return Err(RegistryError::Authorization(format!(
                    "user {user_id} is not a member of class {class_id}"
                )));
            }
            let latest: Option<i64> = tx.query_row(
                "SELECT MAX(created_us) FROM queries WHERE class_id = ?1",
                [class_id.as_str()],
                |r| r.get(0),
            )?;
            let created_us = latest.map_or(to_micros(created_at), |l| l.max(to_micros(created_at)));
            let query_id = QueryId::fresh();
            tx.execute(
                "INSERT INTO queries (query_id, class_id, user_id, query_json, response_json, helpful, created_us)
                 VALUES (?1, ?2, ?3, ?4, ?5, NULL, ?6)",
                params![
                    query_id.as_str(),
                    class_id.as_str(),
                    user_id.as_str(),
                    query_json,
                    response_json,
                    created_us
                ],
            )?;
            Ok(query_id)
        })
    }

    /// A single record, visible to its author and to the class's staff.
    pub fn get_query(&self, principal: Principal<'_>, query_id: &QueryId) -> Result<QueryRecord> {
        self.read(|c| {
            let record = load_query(c, query_id)?;
            if let Principal::User(user) = principal {
                let staff = membership(c, &record.class_id, user)?.is_some_and(Role::is_staff);
                if record.user_id != *user && !staff {
                    return Err(RegistryError::Authorization(format!(
                        "query {query_id} belongs to another user"
                    )));
                }
            }
            Ok(record)
        })
    }

    /// Sets the helpful flag on the caller's own query. Last write wins.
    pub fn record_feedback(&self, query_id: &QueryId, user_id: &UserId, helpful: bool) -> Result<()> {
        self.write(|tx| {
            let owner: String = tx
                .query_row(
                    "SELECT user_id FROM queries WHERE query_id = ?1",
                    [query_id.as_str()],
                    |r| r.get(0),
                )
                .optional()?
                .ok_or_else(|| RegistryError::NotFound(format!("query {query_id}")))?;
            if owner != user_id.as_str() {
                return Err(RegistryError::Authorization(format!(
                    "query {query_id} belongs to another user"
                )));
            }
            tx.execute(
                "UPDATE queries SET helpful = ?2 WHERE query_id = ?1",
                params![query_id.as_str(), helpful],
            )?;
            Ok(())
        })
    }

    /// The caller's own queries in a class, newest first.
    pub fn own_queries(&self, class_id: &ClassId, user_id: &UserId) -> Result<Vec<QueryRecord>> {
        self.read(|c| {
            let mut records = load_queries_by(c, class_id, Some(user_id))?;
            records.reverse();
            Ok(records)
        })
    }

    pub fn list_queries(
        &self,
        principal: Principal<'_>,
        class_id: &ClassId,
        filter: &QueryFilter,
        order: SortOrder,
        page: Page,
    ) -> Result<QueryPage> {
        let records = self.read(|c| {
            require_staff(c, principal, class_id)?;
            load_queries_by(c, class_id, filter.user.as_ref())
        })?;
        Ok(listing::select(records, filter, order, page))
    }

    /// Query counts per user: all time, and within the closed interval
    /// `[now - 7 days, now]`.
    pub fn user_counts(
        &self,
        principal: Principal<'_>,
        class_id: &ClassId,
        now: DateTime<Utc>,
    ) -> Result<Vec<UserCount>> {
        self.read(|c| {
            require_staff(c, principal, class_id)?;
            let week_start = to_micros(now - Duration::days(7));
            let now_us = to_micros(now);
            let mut stmt = c.prepare(
                "SELECT q.user_id, u.display_name, COUNT(*),
                        SUM(CASE WHEN q.created_us BETWEEN ?2 AND ?3 THEN 1 ELSE 0 END)
                 FROM queries q JOIN users u ON u.user_id = q.user_id
                 WHERE q.class_id = ?1
                 GROUP BY q.user_id ORDER BY q.user_id",
            )?;
            let rows = stmt.query_map(params![class_id.as_str(), week_start, now_us], |r| {
                Ok(UserCount {
                    user_id: UserId::new(r.get::<_, String>(0)?),
                    display_name: r.get(1)?,
                    total: r.get::<_, i64>(2)? as u64,
                    past_week: r.get::<_, i64>(3)? as u64,
                })
            })?;
            Ok(rows.collect::<Result<Vec<_>, _>>()?)
        })
    }

    /// All class records as CSV, oldest first.
    pub fn export_csv(&self, principal: Principal<'_>, class_id: &ClassId) -> Result<Vec<u8>> {
        let records = self.read(|c| {
            require_staff(c, principal, class_id)?;
            load_class_queries(c, class_id)
        })?;
        csv_export::write_csv(&records)
    }

    /// Roster (students) and query timestamps for analytics. Staff only.
    pub fn class_activity(&self, principal: Principal<'_>, class_id: &ClassId) -> Result<ClassActivity> {
        self.read(|c| {
            require_staff(c, principal, class_id)?;
            let config = class_config(c, class_id)?
                .ok_or_else(|| RegistryError::NotFound(format!("class {class_id}")))?;
            let mut stmt = c.prepare(
                "SELECT user_id FROM memberships WHERE class_id = ?1 AND role = 'student' ORDER BY user_id",
            )?;
            let roster = stmt
                .query_map([class_id.as_str()], |r| Ok(UserId::new(r.get::<_, String>(0)?)))?
                .collect::<Result<Vec<_>, _>>()?;
            let mut stmt =
                c.prepare("SELECT user_id, created_us FROM queries WHERE class_id = ?1 ORDER BY seq")?;
            let events = stmt
                .query_map([class_id.as_str()], |r| {
                    Ok((UserId::new(r.get::<_, String>(0)?), from_micros(r.get(1)?)))
                })?
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ClassActivity { config, roster, events })
        })
    }

    pub fn count_queries(&self, class_id: &ClassId) -> Result<u64> {
        self.read(|c| {
            let n: i64 = c.query_row(
                "SELECT COUNT(*) FROM queries WHERE class_id = ?1",
                [class_id.as_str()],
                |r| r.get(0),
            )?;
            Ok(n as u64)
        })
    }
}

fn class_config(c: &Connection, class_id: &ClassId) -> Result<Option<ClassConfig>> {
    let json: Option<String> = c
        .query_row(
            "SELECT config_json FROM classes WHERE class_id = ?1",
            [class_id.as_str()],
            |r| r.get(0),
        )
        .optional()?;
    Ok(json.as_deref().map(serde_json::from_str).transpose()?)
}

fn membership(c: &Connection, class_id: &ClassId, user_id: &UserId) -> Result<Option<Role>> {
    let role: Option<String> = c
        .query_row(
            "SELECT role FROM memberships WHERE class_id = ?1 AND user_id = ?2",
            [class_id.as_str(), user_id.as_str()],
            |r| r.get(0),
        )
        .optional()?;
    role.map(|r| r.parse::<Role>().map_err(|e| RegistryError::Storage(e.to_string())))
        .transpose()
}

fn ensure_class_and_user(c: &Connection, class_id: &ClassId, user_id: &UserId) -> Result<()> {
    if class_config(c, class_id)?.is_none() {
        return Err(RegistryError::NotFound(format!("class {class_id}")));
    }
    let user: Option<i64> = c
        .query_row("SELECT 1 FROM users WHERE user_id = ?1", [user_id.as_str()], |r| r.get(0))
        .optional()?;
    if user.is_none() {
        return Err(RegistryError::NotFound(format!("user {user_id}")));
    }
    Ok(())
}

fn require_member(c: &Connection, principal: Principal<'_>, class_id: &ClassId) -> Result<()> {
    if let Principal::User(user) = principal {
        if membership(c, class_id, user)?.is_none() {
            return Err(RegistryError::Authorization(format!("not a member of class {class_id}")));
        }
    }
    Ok(())
}

fn require_staff(c: &Connection, principal: Principal<'_>, class_id: &ClassId) -> Result<()> {
    if let Principal::User(user) = principal {
        match membership(c, class_id, user)? {
            Some(role) if role.is_staff() => {}
            _ => {
                return Err(RegistryError::Authorization(format!(
                    "instructor or TA role required in class {class_id}"
                )))
            }
        }
    }
    Ok(())
}

const RECORD_COLUMNS: &str = "query_id, class_id, user_id, query_json, response_json, helpful, created_us";

fn row_to_record(r: &rusqlite::Row<'_>) -> rusqlite::Result<(String, String, String, String, String, Option<bool>, i64)> {
    Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?, r.get(5)?, r.get(6)?))
}

fn decode_record(
    (query_id, class_id, user_id, query_json, response_json, helpful, created_us): (
        String,
        String,
        String,
        String,
        String,
        Option<bool>,
        i64,
    ),
) -> Result<QueryRecord> {
    Ok(QueryRecord {
        query_id: QueryId::new(query_id),
        class_id: ClassId::new(class_id),
        user_id: UserId::new(user_id),
        query: serde_json::from_str(&query_json)?,
        response: serde_json::from_str(&response_json)?,
        feedback: helpful.map(|helpful| Feedback { helpful }),
        created_at: from_micros(created_us),
    })
}

fn load_query(c: &Connection, query_id: &QueryId) -> Result<QueryRecord> {
    let row = c
        .query_row(
            &format!("SELECT {RECORD_COLUMNS} FROM queries WHERE query_id = ?1"),
            [query_id.as_str()],
            row_to_record,
        )
        .optional()?
        .ok_or_else(|| RegistryError::NotFound(format!("query {query_id}")))?;
    decode_record(row)
}

fn load_class_queries(c: &Connection, class_id: &ClassId) -> Result<Vec<QueryRecord>> {
    load_queries_by(c, class_id, None)
}

/// Class queries in insertion order, optionally only those by one author.
fn load_queries_by(c: &Connection, class_id: &ClassId, author: Option<&UserId>) -> Result<Vec<QueryRecord>> {
    let mut stmt = c.prepare_cached(&format!(
        "SELECT {RECORD_COLUMNS} FROM queries WHERE class_id = ?1 AND (?2 IS NULL OR user_id = ?2) ORDER BY seq"
    ))?;
    let rows = stmt.query_map(params![class_id.as_str(), author.map(UserId::as_str)], row_to_record)?;
    rows.map(|r| decode_record(r?)).collect()
}
