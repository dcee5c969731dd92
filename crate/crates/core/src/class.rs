use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::ids::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Student,
    Ta,
    Instructor,
}

impl Role {
    /// Instructors and TAs get the instructor interfaces.
    pub fn is_staff(self) -> bool {
        matches!(self, Role::Ta | Role::Instructor)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Student => "student",
            Role::Ta => "ta",
            Role::Instructor => "instructor",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "student" => Ok(Role::Student),
            "ta" => Ok(Role::Ta),
            "instructor" => Ok(Role::Instructor),
            other => Err(ConfigError::UnknownRole(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("avoid set entries must not be empty")]
    EmptyAvoidEntry,
    #[error("default language must not be empty")]
    EmptyDefaultLanguage,
    #[error("class name must not be empty")]
    EmptyName,
    #[error("unknown timezone {0:?}")]
    UnknownTimezone(String),
    #[error("unknown role {0:?}")]
    UnknownRole(String),
}

/// Instructor keywords that responses should not use or mention.
///
/// Entries are trimmed, non-empty and unique ignoring case; the first
/// spelling wins and insertion order is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct AvoidSet(Vec<String>);

impl AvoidSet {
    pub fn new<S: AsRef<str>>(entries: impl IntoIterator<Item = S>) -> Result<Self, ConfigError> {
        let mut out: Vec<String> = Vec::new();
        for entry in entries {
            let entry = entry.as_ref().trim();
            if entry.is_empty() {
                return Err(ConfigError::EmptyAvoidEntry);
            }
            let lowered = entry.to_lowercase();
            if !out.iter().any(|e| e.to_lowercase() == lowered) {
                out.push(entry.to_string());
            }
        }
        Ok(Self(out))
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<String>> for AvoidSet {
    type Error = ConfigError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        AvoidSet::new(v)
    }
}

impl From<AvoidSet> for Vec<String> {
    fn from(s: AvoidSet) -> Self {
        s.0
    }
}

pub const DEFAULT_LANGUAGE: &str = "Python";
pub const DEFAULT_TIMEZONE: &str = "UTC";

/// Per-class settings owned by the instructor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConfig {
    pub class_id: ClassId,
    pub name: String,
    pub default_language: String,
    #[serde(default)]
    pub avoid_set: AvoidSet,
    /// IANA timezone used for hour-of-day analytics.
    #[serde(default = "default_timezone")]
    pub timezone: String,
    /// First day of week 1 for weekly analytics.
    #[serde(default)]
    pub term_start: Option<NaiveDate>,
}

fn default_timezone() -> String {
    DEFAULT_TIMEZONE.to_string()
}

impl ClassConfig {
    pub fn new(class_id: ClassId, name: impl Into<String>) -> Self {
        Self {
            class_id,
            name: name.into(),
            default_language: DEFAULT_LANGUAGE.to_string(),
            avoid_set: AvoidSet::default(),
            timezone: default_timezone(),
            term_start: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(ConfigError::EmptyName);
        }
        if self.default_language.trim().is_empty() {
            return Err(ConfigError::EmptyDefaultLanguage);
        }
        parse_timezone(&self.timezone)?;
        Ok(())
    }
}

pub fn parse_timezone(name: &str) -> Result<chrono_tz::Tz, ConfigError> {
    name.parse::<chrono_tz::Tz>()
        .map_err(|_| ConfigError::UnknownTimezone(name.to_string()))
}
