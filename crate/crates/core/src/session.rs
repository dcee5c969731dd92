//! Signed, self-contained session tokens.
//!
//! A token is `base64url(json payload) "." base64url(HMAC-SHA256)`. Nothing
//! is stored server-side; every request re-validates the token.

use base64::engine::general_purpose::URL_SAFE_NO_PAD as B64;
use base64::Engine;
use chrono::{DateTime, Duration, Utc};
use hmac::{Hmac, KeyInit, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::class::Role;
use crate::ids::{ClassId, UserId};

/// An authenticated user acting within one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub user_id: UserId,
    pub class_id: ClassId,
    pub role: Role,
}

impl Session {
    pub fn is_staff(&self) -> bool {
        self.role.is_staff()
    }
}

#[derive(Serialize, Deserialize)]
struct Claims {
    #[serde(flatten)]
    session: Session,
    exp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("malformed session token")]
    Malformed,
    #[error("invalid session signature")]
    BadSignature,
    #[error("session expired")]
    Expired,
}

#[derive(Clone)]
pub struct SessionKeys {
    key: Vec<u8>,
    ttl: Duration,
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionKeys").field("ttl", &self.ttl).finish_non_exhaustive()
    }
}

impl SessionKeys {
    pub fn new(key: impl Into<Vec<u8>>, ttl: Duration) -> Self {
        Self { key: key.into(), ttl }
    }

    fn mac(&self, payload: &str) -> Hmac<Sha256> {
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.key).expect("HMAC accepts any key length");
        mac.update(payload.as_bytes());
        mac
    }

    pub fn issue(&self, session: &Session, now: DateTime<Utc>) -> String {
        let claims = Claims {
            session: session.clone(),
            exp: (now + self.ttl).timestamp(),
        };
        let payload = B64.encode(serde_json::to_vec(&claims).expect("claims serialize"));
        let sig = B64.encode(self.mac(&payload).finalize().into_bytes());
        format!("{payload}.{sig}")
    }

    pub fn validate(&self, token: &str, now: DateTime<Utc>) -> Result<Session, SessionError> {
        let (payload, sig) = token.split_once('.').ok_or(SessionError::Malformed)?;
        let sig = B64.decode(sig).map_err(|_| SessionError::Malformed)?;
        self.mac(payload)
            .verify_slice(&sig)
            .map_err(|_| SessionError::BadSignature)?;
        let bytes = B64.decode(payload).map_err(|_| SessionError::Malformed)?;
        let claims: Claims = serde_json::from_slice(&bytes).map_err(|_| SessionError::Malformed)?;
        if now.timestamp() >= claims.exp {
            return Err(SessionError::Expired);
        }
        Ok(claims.session)
    }
}
