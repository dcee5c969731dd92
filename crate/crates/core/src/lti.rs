//! LTI 1.1 basic launch: OAuth 1.0a HMAC-SHA1 signature verification, replay
//! protection, role mapping, and user/class provisioning.

use std::collections::HashMap;
use std::sync::Mutex;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use chrono::{DateTime, Utc};
use hmac::{Hmac, KeyInit, Mac};
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use sha1::Sha1;

use crate::class::{ClassConfig, Role};
use crate::ids::{ClassId, UserId};
use crate::registry::{LmsIdentity, Registry, RegistryError, User};
use crate::session::Session;

/// Accepted clock skew between the LMS and this server, in seconds.
pub const TIMESTAMP_WINDOW_SECS: i64 = 300;
/// How long a used nonce is remembered.
pub const NONCE_TTL_SECS: i64 = 600;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtiError {
    #[error("launch authentication failed: {0}")]
    Authentication(String),
    #[error("launch rejected as replay: {0}")]
    Replay(String),
    #[error("launch configuration error: {0}")]
    Configuration(String),
    #[error("malformed launch: {0}")]
    Malformed(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// RFC 3986 unreserved characters pass through; everything else is encoded.
const OAUTH_ENCODE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub fn oauth_encode(s: &str) -> String {
    utf8_percent_encode(s, OAUTH_ENCODE).to_string()
}

/// OAuth 1.0 signature base string over every parameter except
/// `oauth_signature`.
pub fn signature_base_string(method: &str, url: &str, params: &[(String, String)]) -> String {
    let mut pairs: Vec<(String, String)> = params
        .iter()
        .filter(|(k, _)| k != "oauth_signature")
        .map(|(k, v)| (oauth_encode(k), oauth_encode(v)))
        .collect();
    pairs.sort();
    let normalized = pairs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("&");
    format!(
        "{}&{}&{}",
        method.to_ascii_uppercase(),
        oauth_encode(url),
        oauth_encode(&normalized)
    )
}

fn signing_key(consumer_secret: &str) -> String {
    format!("{}&", oauth_encode(consumer_secret))
}

/// Base64 HMAC-SHA1 signature for a launch.
pub fn sign(method: &str, url: &str, params: &[(String, String)], consumer_secret: &str) -> String {
    let mut mac = Hmac::<Sha1>::new_from_slice(signing_key(consumer_secret).as_bytes())
        .expect("HMAC accepts any key length");
    mac.update(signature_base_string(method, url, params).as_bytes());
    B64.encode(mac.finalize().into_bytes())
}

fn verify_signature(method: &str, url: &str, params: &[(String, String)], secret: &str, given: &str) -> bool {
    let Ok(given) = B64.decode(given) else {
        return false;
    };
    let mut mac = Hmac::<Sha1>::new_from_slice(signing_key(secret).as_bytes()).expect("HMAC accepts any key length");
    mac.update(signature_base_string(method, url, params).as_bytes());
    mac.verify_slice(&given).is_ok()
}

/// Maps one LMS role string. `TeachingAssistant` is checked first because
/// the LIS sub-role `Instructor/TeachingAssistant` names both.
pub fn map_role(role: &str) -> Role {
    if role.contains("TeachingAssistant") {
        Role::Ta
    } else if role.contains("Instructor") {
        Role::Instructor
    } else {
        Role::Student
    }
}

/// The most privileged mapping among a launch's roles; student if none.
pub fn map_roles<S: AsRef<str>>(roles: &[S]) -> Role {
    roles
        .iter()
        .map(|r| map_role(r.as_ref()))
        .max()
        .unwrap_or(Role::Student)
}

/// Used nonces per consumer, remembered for [`NONCE_TTL_SECS`].
#[derive(Debug, Default)]
pub struct NonceStore {
    seen: Mutex<HashMap<(String, String), i64>>,
}

impl NonceStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the nonce, returning `false` if it was already used and has
    /// not yet expired.
    pub fn check_and_insert(&self, consumer: &str, nonce: &str, now: i64) -> bool {
        let mut seen = self.seen.lock().unwrap_or_else(|e| e.into_inner());
        seen.retain(|_, expires| *expires > now);
        let key = (consumer.to_string(), nonce.to_string());
        if seen.contains_key(&key) {
            return false;
        }
        seen.insert(key, now + NONCE_TTL_SECS);
        true
    }
}

/// A launch whose signature, timestamp and nonce checked out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedLaunch {
    pub consumer_key: String,
    pub context_id: String,
    pub context_title: Option<String>,
    pub subject_id: String,
    pub display_name: String,
    pub roles: Vec<String>,
    pub role: Role,
}

impl VerifiedLaunch {
    pub fn user_id(&self) -> UserId {
        UserId::new(format!("lti:{}:{}", self.consumer_key, self.subject_id))
    }

    pub fn class_id(&self) -> ClassId {
        ClassId::new(format!("lti:{}:{}", self.consumer_key, self.context_id))
    }
}

#[derive(Debug)]
pub struct LaunchVerifier {
    consumers: HashMap<String, String>,
    launch_url: String,
    nonces: NonceStore,
}

impl LaunchVerifier {
    /// `launch_url` is the absolute URL the LMS posts to, without query
    /// string, exactly as the LMS signs it.
    pub fn new(consumers: HashMap<String, String>, launch_url: impl Into<String>) -> Self {
        Self {
            consumers,
            launch_url: launch_url.into(),
            nonces: NonceStore::new(),
        }
    }

    pub fn launch_url(&self) -> &str {
        &self.launch_url
    }

    pub fn verify(&self, params: &[(String, String)], now: DateTime<Utc>) -> Result<VerifiedLaunch, LtiError> {
        let get = |name: &str| params.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str());
        let require = |name: &str| {
            get(name)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| LtiError::Malformed(format!("missing {name}")))
        };

        let consumer_key = require("oauth_consumer_key")?;
        let secret = self
            .consumers
            .get(consumer_key)
            .ok_or_else(|| LtiError::Configuration(format!("unknown consumer key {consumer_key:?}")))?;
        if get("oauth_signature_method") != Some("HMAC-SHA1") {
            return Err(LtiError::Authentication("unsupported signature method".into()));
        }
        let signature = get("oauth_signature")
            .ok_or_else(|| LtiError::Authentication("missing oauth_signature".into()))?;
        if !verify_signature("POST", &self.launch_url, params, secret, signature) {
            return Err(LtiError::Authentication("signature mismatch".into()));
        }

        let timestamp: i64 = require("oauth_timestamp")?
            .parse()
            .map_err(|_| LtiError::Malformed("oauth_timestamp is not an integer".into()))?;
        if (now.timestamp() - timestamp).abs() > TIMESTAMP_WINDOW_SECS {
            return Err(LtiError::Replay("timestamp outside the accepted window".into()));
        }
        let nonce = require("oauth_nonce")?;
        if !self.nonces.check_and_insert(consumer_key, nonce, now.timestamp()) {
            return Err(LtiError::Replay("nonce already used".into()));
        }

        if get("lti_message_type") != Some("basic-lti-launch-request") {
            return Err(LtiError::Malformed("not a basic launch request".into()));
        }
        let subject_id = require("user_id")?;
        let context_id = require("context_id")?;
        let roles: Vec<String> = get("roles")
            .unwrap_or_default()
            .split(',')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(str::to_string)
            .collect();
        let display_name = get("lis_person_name_full")
            .filter(|n| !n.trim().is_empty())
            .map(str::to_string)
            .or_else(|| {
                let given = get("lis_person_name_given").unwrap_or_default();
                let family = get("lis_person_name_family").unwrap_or_default();
                let joined = format!("{given} {family}").trim().to_string();
                (!joined.is_empty()).then_some(joined)
            })
            .unwrap_or_else(|| subject_id.to_string());

        Ok(VerifiedLaunch {
            consumer_key: consumer_key.to_string(),
            context_id: context_id.to_string(),
            context_title: get("context_title").filter(|t| !t.trim().is_empty()).map(str::to_string),
            subject_id: subject_id.to_string(),
            display_name,
            role: map_roles(&roles),
            roles,
        })
    }
}

/// Verifies a launch, provisions the user, class and membership, and returns
/// the session it grants.
///
/// A class is created on the first instructor launch for an unknown context;
/// anyone else arriving first gets a configuration error.
pub fn handle_launch(
    verifier: &LaunchVerifier,
    registry: &Registry,
    params: &[(String, String)],
    now: DateTime<Utc>,
) -> Result<Session, LtiError> {
    let launch = verifier.verify(params, now)?;
    let user_id = launch.user_id();
    let class_id = launch.class_id();

    if !registry.class_exists(&class_id)? {
        if launch.role != Role::Instructor {
            return Err(LtiError::Configuration(
                "this class has not been set up yet; an instructor must launch the tool first".into(),
            ));
        }
        let name = launch.context_title.clone().unwrap_or_else(|| launch.context_id.clone());
        registry.ensure_class(&ClassConfig::new(class_id.clone(), name))?;
    }

    registry.upsert_user(&User {
        user_id: user_id.clone(),
        display_name: launch.display_name.clone(),
        lms_identity: Some(LmsIdentity {
            consumer: launch.consumer_key.clone(),
            context: launch.context_id.clone(),
            subject: launch.subject_id.clone(),
        }),
    })?;
    registry.set_membership(&class_id, &user_id, launch.role)?;

    Ok(Session {
        user_id,
        class_id,
        role: launch.role,
    })
}
