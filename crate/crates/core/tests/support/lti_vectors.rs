//! Launch vectors signed by the reference signer, applied in order against
//! one verifier (later vectors rely on nonces consumed by earlier ones).

use super::signer::sign_launch;

pub const LAUNCH_URL: &str = "https://help.example.edu/lti/launch";
pub const NOW: i64 = 1_680_350_400; // 2023-04-01T12:00:00Z

pub fn consumers() -> Vec<(&'static str, &'static str)> {
    vec![("moodle", "s3cret-moodle"), ("canvas", "c&v=s p@ce+ü")]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expected {
    /// Accepted with this role and these derived ids.
    Accept { role: &'static str, user_id: String, class_id: String },
    /// Rejected with this error kind.
    Reject(&'static str),
}

pub struct Vector {
    pub name: String,
    pub params: Vec<(String, String)>,
    pub expected: Expected,
}

struct Launch {
    consumer: &'static str,
    secret: &'static str,
    nonce: String,
    timestamp: i64,
    user: String,
    context: String,
    roles: String,
    extra: Vec<(&'static str, String)>,
}

impl Launch {
    fn new(consumer: &'static str, nonce: impl Into<String>) -> Self {
        let secret = consumers().into_iter().find(|(k, _)| *k == consumer).map(|(_, s)| s).unwrap_or("none");
        Self {
            consumer,
            secret,
            nonce: nonce.into(),
            timestamp: NOW,
            user: "u-1".into(),
            context: "cs101".into(),
            roles: "Learner".into(),
            extra: Vec::new(),
        }
    }

    fn params(&self) -> Vec<(String, String)> {
        let mut p: Vec<(String, String)> = [
            ("oauth_consumer_key", self.consumer.to_string()),
            ("oauth_signature_method", "HMAC-SHA1".to_string()),
            ("oauth_timestamp", self.timestamp.to_string()),
            ("oauth_nonce", self.nonce.clone()),
            ("oauth_version", "1.0".to_string()),
            ("lti_message_type", "basic-lti-launch-request".to_string()),
            ("lti_version", "LTI-1p0".to_string()),
            ("resource_link_id", "link-1".to_string()),
            ("user_id", self.user.clone()),
            ("context_id", self.context.clone()),
            ("roles", self.roles.clone()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        p.extend(self.extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        p
    }

    fn signed(&self) -> Vec<(String, String)> {
        sign_launch(LAUNCH_URL, self.params(), self.secret)
    }

    fn accept(&self, role: &'static str) -> Expected {
        Expected::Accept {
            role,
            user_id: format!("lti:{}:{}", self.consumer, self.user),
            class_id: format!("lti:{}:{}", self.consumer, self.context),
        }
    }
}

fn set(params: &mut [(String, String)], key: &str, value: &str) {
    params.iter_mut().find(|(k, _)| k == key).unwrap().1 = value.to_string();
}

pub fn vectors() -> Vec<Vector> {
    let mut out = Vec::new();
    let mut push = |name: &str, params, expected| {
        out.push(Vector {
            name: name.to_string(),
            params,
            expected,
        })
    };

    // Role mapping across both consumers.
    let roles: [(&str, &str); 12] = [
        ("Learner", "student"),
        ("Instructor", "instructor"),
        ("urn:lti:role:ims/lis/Instructor", "instructor"),
        ("TeachingAssistant", "ta"),
        ("urn:lti:role:ims/lis/TeachingAssistant", "ta"),
        ("Instructor/TeachingAssistant", "ta"),
        ("Learner,Instructor", "instructor"),
        ("Learner,TeachingAssistant", "ta"),
        ("Mentor", "student"),
        ("ContentDeveloper", "student"),
        ("urn:lti:instrole:ims/lis/Administrator", "student"),
        ("", "student"),
    ];
    for (i, (role, expected)) in roles.iter().enumerate() {
        for consumer in ["moodle", "canvas"] {
            let mut l = Launch::new(consumer, format!("role-{consumer}-{i}"));
            l.roles = role.to_string();
            l.user = format!("user-{i}");
            push(&format!("role {role:?} via {consumer}"), l.signed(), l.accept(expected));
        }
    }

    // Awkward characters survive normalization.
    let awkward = [
        ("space and plus", "Ann Lee+Jr"),
        ("reserved chars", "a&b=c/d?e#f"),
        ("unicode", "Zoë 山田 🎓"),
        ("percent literal", "100% ~sure*"),
    ];
    for (i, (name, value)) in awkward.iter().enumerate() {
        let mut l = Launch::new("canvas", format!("awk-{i}"));
        l.user = format!("id {value}");
        l.extra.push(("lis_person_name_full", value.to_string()));
        l.extra.push(("context_title", value.to_string()));
        push(&format!("awkward {name}"), l.signed(), l.accept("student"));
    }
    let mut l = Launch::new("moodle", "custom-params");
    l.extra.push(("custom_a", "1".into()));
    l.extra.push(("custom_a", "0".into()));
    push("repeated parameter names", l.signed(), l.accept("student"));

    // Timestamp window edges.
    for (name, offset, ok) in [
        ("timestamp 300s old", -300, true),
        ("timestamp 300s ahead", 300, true),
        ("timestamp 301s old", -301, false),
        ("timestamp 301s ahead", 301, false),
    ] {
        let mut l = Launch::new("moodle", format!("ts{offset}"));
        l.timestamp = NOW + offset;
        let expected = if ok { l.accept("student") } else { Expected::Reject("replay") };
        push(name, l.signed(), expected);
    }

    // Replays.
    let first = Launch::new("moodle", "replayed");
    push("fresh nonce", first.signed(), first.accept("student"));
    push("same launch again", first.signed(), Expected::Reject("replay"));
    let mut other_user = Launch::new("moodle", "replayed");
    other_user.user = "someone-else".into();
    push("reused nonce, other user", other_user.signed(), Expected::Reject("replay"));
    let same_nonce_other_consumer = Launch::new("canvas", "replayed");
    push(
        "same nonce under another consumer",
        same_nonce_other_consumer.signed(),
        same_nonce_other_consumer.accept("student"),
    );

    // Tampering.
    for (name, key, value) in [
        ("tampered roles", "roles", "Instructor"),
        ("tampered user", "user_id", "u-2"),
        ("tampered context", "context_id", "cs999"),
        ("tampered timestamp", "oauth_timestamp", "1680350401"),
    ] {
        let l = Launch::new("moodle", format!("tamper-{key}"));
        let mut p = l.signed();
        set(&mut p, key, value);
        push(name, p, Expected::Reject("authentication"));
    }
    let l = Launch::new("moodle", "tamper-extra");
    let mut p = l.signed();
    p.push(("custom_injected".into(), "1".into()));
    push("added parameter", p, Expected::Reject("authentication"));

    let mut l = Launch::new("moodle", "wrong-secret");
    l.secret = "s3cret-mood1e";
    push("wrong secret", l.signed(), Expected::Reject("authentication"));
    let mut l = Launch::new("canvas", "swapped-secret");
    l.secret = "s3cret-moodle";
    push("other consumer's secret", l.signed(), Expected::Reject("authentication"));

    let l = Launch::new("moodle", "no-sig");
    push("missing signature", l.params(), Expected::Reject("authentication"));
    let l = Launch::new("moodle", "bad-b64");
    let mut p = l.signed();
    set(&mut p, "oauth_signature", "not base64!!");
    push("garbled signature", p, Expected::Reject("authentication"));
    let l = Launch::new("moodle", "plaintext");
    let mut p = l.params();
    set(&mut p, "oauth_signature_method", "PLAINTEXT");
    p.push(("oauth_signature".into(), "s3cret-moodle&".into()));
    push("plaintext method", p, Expected::Reject("authentication"));

    let l = Launch::new("blackboard", "unknown");
    push("unknown consumer", l.signed(), Expected::Reject("configuration"));

    let mut l = Launch::new("moodle", "no-user");
    l.user = String::new();
    push("empty user_id", l.signed(), Expected::Reject("malformed"));
    let l = Launch::new("moodle", "wrong-type");
    let mut p = l.params();
    set(&mut p, "lti_message_type", "ContentItemSelectionRequest");
    push("not a launch request", sign_launch(LAUNCH_URL, p, "s3cret-moodle"), Expected::Reject("malformed"));

    out
}

#[test]
fn suite_has_fifty_vectors() {
    assert_eq!(vectors().len(), 50);
}
