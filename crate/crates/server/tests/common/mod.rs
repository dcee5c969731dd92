#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use chrono::Duration;
use codehelp_core::llm::mock::{Reply, ScriptedBackend};
use codehelp_core::lti::LaunchVerifier;
use codehelp_core::registry::Registry;
use codehelp_core::session::SessionKeys;
use codehelp_core::{Pipeline, PipelineModels, Stage};
use codehelp_server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

pub const LAUNCH_URL: &str = "http://localhost/lti/launch";
pub const LTI_KEY: &str = "moodle";
pub const LTI_SECRET: &str = "launch-secret";

pub struct Harness {
    pub app: Router,
    pub state: AppState,
    pub backend: Arc<ScriptedBackend>,
}

pub struct Answer {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Answer {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!("body is not JSON ({e}): {}", String::from_utf8_lossy(&self.body))
        })
    }

    pub fn text(&self) -> String {
        String::from_utf8(self.body.clone()).unwrap()
    }

    /// Asserts the body is a well-formed error with the given code.
    pub fn expect_error(&self, status: StatusCode, code: &str) {
        assert_eq!(self.status, status, "body: {}", String::from_utf8_lossy(&self.body));
        let body = self.json();
        let obj = body.as_object().unwrap();
        assert_eq!(obj.len(), 1, "{body}");
        let err = obj["error"].as_object().unwrap();
        assert_eq!(err.len(), 2, "{body}");
        assert_eq!(err["code"], code, "{body}");
        assert!(err["message"].is_string());
    }
}

/// Answers every stage with fence-free text.
pub fn friendly_backend() -> ScriptedBackend {
    ScriptedBackend::responder(|stage, ordinal, _| match stage {
        Stage::Sufficiency => Reply::text("The student wants help with a loop. OK."),
        Stage::Main => Reply::Text(format!("Check the loop condition on the second line ({ordinal}).")),
        Stage::Removal => Reply::text("Rewritten."),
    })
}

impl Harness {
    pub fn new() -> Self {
        Self::with_backend(friendly_backend())
    }

    pub fn with_backend(backend: ScriptedBackend) -> Self {
        let backend = Arc::new(backend);
        let registry = Registry::open_in_memory().unwrap();
        let pipeline = Pipeline::new(backend.clone(), PipelineModels::default());
        let state = AppState::new(registry, pipeline, SessionKeys::new("test-secret", Duration::hours(1)))
            .with_dev_login(true)
            .with_lti(LaunchVerifier::new(
                HashMap::from([(LTI_KEY.to_string(), LTI_SECRET.to_string())]),
                LAUNCH_URL,
            ));
        Self {
            app: router(state.clone()),
            state,
            backend,
        }
    }

    pub async fn send(&self, request: Request<Body>) -> Answer {
        let response = self.app.clone().oneshot(request).await.unwrap();
        let status = response.status();
        let headers = response.headers().clone();
        let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
        Answer { status, headers, body }
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Answer {
        let mut builder = Request::builder().method(method).uri(uri);
        if let Some(token) = token {
            builder = builder.header(AUTHORIZATION, format!("Bearer {token}"));
        }
        let body = match body {
            Some(v) => {
                builder = builder.header(CONTENT_TYPE, "application/json");
                Body::from(serde_json::to_vec(&v).unwrap())
            }
            None => Body::empty(),
        };
        self.send(builder.body(body).unwrap()).await
    }

    pub async fn get(&self, uri: &str, token: &str) -> Answer {
        self.call(Method::GET, uri, Some(token), None).await
    }

    pub async fn post(&self, uri: &str, token: &str, body: Value) -> Answer {
        self.call(Method::POST, uri, Some(token), Some(body)).await
    }

    pub async fn login(&self, user: &str, class: &str, role: &str) -> String {
        let r = self
            .call(
                Method::POST,
                "/dev/login",
                None,
                Some(json!({"user_id": user, "class_id": class, "role": role, "display_name": format!("{user} name")})),
            )
            .await;
        assert_eq!(r.status, StatusCode::OK, "{}", r.text());
        r.json()["token"].as_str().unwrap().to_string()
    }

    pub async fn ask(&self, token: &str, body: Value) -> Answer {
        self.post("/api/help", token, body).await
    }

    pub fn stored(&self, class: &str) -> u64 {
        self.state
            .registry()
            .count_queries(&codehelp_core::ClassId::new(class))
            .unwrap()
    }
}

pub fn form_body(params: &[(String, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{}={}", form_encode(k), form_encode(v)))
        .collect::<Vec<_>>()
        .join("&")
}

fn form_encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}
