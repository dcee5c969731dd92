//! Service configuration from environment variables plus an optional TOML
//! file for model and price settings.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;

use codehelp_core::llm::PriceTable;
use codehelp_core::{LlmError, PipelineModels, QueryId};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{name} is invalid: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("cannot read settings file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("settings file {path} is invalid: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Models(#[from] LlmError),
}

/// Model and price settings, normally read from the file named by
/// `CODEHELP_CONFIG`.
///
/// ```toml
/// [models.removal]
/// model_id = "gpt-3.5-turbo-0301"
/// temperature = 0.0
/// max_completion_tokens = 1000
/// endpoint = "chat"
///
/// [prices."gpt-3.5-turbo-0301"]
/// prompt_per_1k = "0.0015"
/// completion_per_1k = "0.002"
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default)]
    pub models: PartialModels,
    /// Entries here are added to (or override) the built-in price table.
    #[serde(default)]
    pub prices: PriceTable,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialModels {
    pub sufficiency: Option<codehelp_core::ModelSpec>,
    pub main: Option<codehelp_core::ModelSpec>,
    pub removal: Option<codehelp_core::ModelSpec>,
}

impl Settings {
    pub fn parse(text: &str, path: PathBuf) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse { path, source })
    }

    pub fn models(&self) -> PipelineModels {
        let defaults = PipelineModels::default();
        PipelineModels {
            sufficiency: self.models.sufficiency.clone().unwrap_or(defaults.sufficiency),
            main: self.models.main.clone().unwrap_or(defaults.main),
            removal: self.models.removal.clone().unwrap_or(defaults.removal),
        }
    }

    pub fn prices(&self) -> Result<PriceTable, ConfigError> {
        let mut table = PriceTable::june_2023();
        for (model, price) in self.prices.iter() {
            table.insert(model.clone(), *price)?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub bind: SocketAddr,
    /// SQLite file; `None` keeps everything in memory.
    pub database: Option<PathBuf>,
    /// Externally visible base URL. The LTI launch URL is derived from it and
    /// must match what the LMS signs.
    pub public_url: String,
    pub lti_consumers: HashMap<String, String>,
    pub dev_login: bool,
    /// `None` means a random per-process secret.
    pub session_secret: Option<String>,
    pub session_ttl_hours: i64,
    pub models: PipelineModels,
    pub prices: PriceTable,
}

impl ServerConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let get = |name: &str| lookup(name).filter(|v| !v.trim().is_empty());

        let bind: SocketAddr = get("CODEHELP_BIND")
            .unwrap_or_else(|| "127.0.0.1:8080".into())
            .parse()
            .map_err(|e: std::net::AddrParseError| ConfigError::Invalid {
                name: "CODEHELP_BIND",
                reason: e.to_string(),
            })?;
        let public_url = get("CODEHELP_PUBLIC_URL")
            .unwrap_or_else(|| format!("http://{bind}"))
            .trim_end_matches('/')
            .to_string();
        let lti_consumers = match get("CODEHELP_LTI_CONSUMERS") {
            Some(raw) => parse_consumers(&raw)?,
            None => HashMap::new(),
        };
        let dev_login = match get("CODEHELP_DEV_LOGIN").as_deref() {
            None | Some("0" | "false" | "no") => false,
            Some("1" | "true" | "yes") => true,
            Some(other) => {
                return Err(ConfigError::Invalid {
                    name: "CODEHELP_DEV_LOGIN",
                    reason: format!("expected true or false, got {other:?}"),
                })
            }
        };
        let session_ttl_hours = match get("CODEHELP_SESSION_TTL_HOURS") {
            Some(raw) => raw.parse().ok().filter(|h: &i64| *h > 0).ok_or(ConfigError::Invalid {
                name: "CODEHELP_SESSION_TTL_HOURS",
                reason: "expected a positive integer".into(),
            })?,
            None => 12,
        };
        let settings = match get("CODEHELP_CONFIG") {
            Some(path) => {
                let path = PathBuf::from(path);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                Settings::parse(&text, path)?
            }
            None => Settings::parse("", PathBuf::new())?,
        };

        let config = Self {
            bind,
            database: get("CODEHELP_DB").map(PathBuf::from),
            public_url,
            lti_consumers,
            dev_login,
            session_secret: get("CODEHELP_SESSION_SECRET"),
            session_ttl_hours,
            models: settings.models(),
            prices: settings.prices()?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Every stage model must be valid and priced.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.models.validate()?;
        self.prices.validate()?;
        for spec in [&self.models.sufficiency, &self.models.main, &self.models.removal] {
            if self.prices.get(&spec.model_id).is_none() {
                return Err(ConfigError::Invalid {
                    name: "prices",
                    reason: format!("no price entry for model {}", spec.model_id),
                });
            }
        }
        Ok(())
    }

    pub fn launch_url(&self) -> String {
        format!("{}/lti/launch", self.public_url)
    }

    pub fn session_secret_bytes(&self) -> Vec<u8> {
        match &self.session_secret {
            Some(secret) => secret.clone().into_bytes(),
            None => {
                tracing::warn!("CODEHELP_SESSION_SECRET is not set; sessions will not survive a restart");
                format!("{}{}", QueryId::fresh(), QueryId::fresh()).into_bytes()
            }
        }
    }
}

/// `key:secret` pairs separated by commas. Secrets may contain colons.
fn parse_consumers(raw: &str) -> Result<HashMap<String, String>, ConfigError> {
    raw.split(',')
        .map(str::trim)
        .filter(|pair| !pair.is_empty())
        .map(|pair| {
            let (key, secret) = pair
                .split_once(':')
                .filter(|(k, s)| !k.trim().is_empty() && !s.is_empty())
                .ok_or_else(|| ConfigError::Invalid {
                    name: "CODEHELP_LTI_CONSUMERS",
                    reason: "expected comma-separated key:secret pairs".into(),
                })?;
            Ok((key.trim().to_string(), secret.to_string()))
        })
        .collect()
}
