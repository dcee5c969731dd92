//! Seeded synthetic class history used by the registry and analytics oracles.

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use codehelp_core::class::{ClassConfig, Role};
use codehelp_core::guardrail::GuardedResponse;
use codehelp_core::llm::TokenUsage;
use codehelp_core::registry::{Feedback, QueryRecord, Registry, User};
use codehelp_core::{ClassId, HelpQuery, UserId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TIMEZONE: &str = "America/Chicago";
pub const WEEKS: u32 = 45;

pub fn term_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 1, 9).unwrap()
}

pub struct Dataset {
    pub registry: Registry,
    pub class_id: ClassId,
    pub students: Vec<UserId>,
    pub instructor: UserId,
    pub ta: UserId,
    /// Everything inserted, oldest first, with the feedback last applied.
    pub records: Vec<QueryRecord>,
}

impl Dataset {
    pub fn events(&self) -> Vec<(UserId, DateTime<Utc>)> {
        self.records.iter().map(|r| (r.user_id.clone(), r.created_at)).collect()
    }
}

const FRAGMENTS: &[&str] = &[
    "for i in range(10):",
    "x, y = y, x",
    "print(\"hello, world\")",
    "AttributeError: 'str' object has no attribute 'remove'",
    "line one\nline two",
    "crlf\r\nending",
    "naïve café",
    "日本語のテキスト",
    "emoji 🐍",
    "quote \" inside",
    "trailing comma,",
    "SELECT * FROM t;",
    "while True: pass",
    "Needle in the haystack",
    "tab\tseparated",
];

fn text(rng: &mut ChaCha8Rng, min: usize) -> String {
    let n = rng.gen_range(min..4);
    let parts: Vec<&str> = (0..n).map(|_| *FRAGMENTS.choose(rng).unwrap()).collect();
    parts.join(" ")
}

fn maybe_text(rng: &mut ChaCha8Rng) -> Option<String> {
    if rng.gen_bool(0.3) {
        None
    } else {
        Some(text(rng, 1))
    }
}

fn timestamps(rng: &mut ChaCha8Rng, random: usize) -> Vec<DateTime<Utc>> {
    let lo = Utc.with_ymd_and_hms(2023, 1, 2, 0, 0, 0).unwrap().timestamp_micros();
    let hi = Utc.with_ymd_and_hms(2023, 11, 20, 0, 0, 0).unwrap().timestamp_micros();
    let mut out: Vec<DateTime<Utc>> = (0..random)
        .map(|_| DateTime::from_timestamp_micros(rng.gen_range(lo..hi)).unwrap())
        .collect();
    // Around both 2023 DST transitions in Chicago.
    for (y, m, d, h, mi) in [(2023, 3, 12, 7, 30), (2023, 3, 12, 8, 30), (2023, 11, 5, 6, 30), (2023, 11, 5, 7, 30)] {
        out.push(Utc.with_ymd_and_hms(y, m, d, h, mi, 0).unwrap());
    }
    // Local midnights opening weeks 2 and 10 (CST, UTC-6) and week 20 (CDT, UTC-5).
    for (m, d, h) in [(1, 16, 6), (3, 13, 5), (5, 22, 5)] {
        let t = Utc.with_ymd_and_hms(2023, m, d, h, 0, 0).unwrap();
        out.push(t);
        out.push(t - Duration::microseconds(1));
    }
    out.sort();
    out
}

fn response(query: &HelpQuery, rng: &mut ChaCha8Rng) -> GuardedResponse {
    GuardedResponse {
        query_echo: query.clone(),
        main_text: text(rng, 1),
        clarification_text: rng.gen_bool(0.15).then(|| text(rng, 1)),
        code_removal_applied: rng.gen_bool(0.1),
        candidate_scores: vec![-(rng.gen_range(0..3)), -(rng.gen_range(0..3))],
        usage: TokenUsage::new(rng.gen_range(100..900), rng.gen_range(10..400)),
        usage_by_stage: vec![],
        created_at: Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap(),
    }
}

/// Builds a registry holding `random + 10` queries from a fixed seed.
pub fn build(seed: u64, random: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let registry = Registry::open_in_memory().unwrap();
    let class_id = ClassId::new("oracle-class");
    let mut config = ClassConfig::new(class_id.clone(), "Oracle 101");
    config.timezone = TIMEZONE.into();
    config.term_start = Some(term_start());
    registry.ensure_class(&config).unwrap();

    let add = |id: String, role: Role| {
        let user_id = UserId::new(id.clone());
        registry
            .upsert_user(&User {
                user_id: user_id.clone(),
                display_name: format!("Name, \"{id}\""),
                lms_identity: None,
            })
            .unwrap();
        registry.set_membership(&class_id, &user_id, role).unwrap();
        user_id
    };
    let students: Vec<UserId> = (0..40).map(|i| add(format!("student{i:02}"), Role::Student)).collect();
    let instructor = add("instructor".into(), Role::Instructor);
    let ta = add("ta".into(), Role::Ta);

    // The last three students never ask anything.
    let mut askers: Vec<UserId> = students[..37].to_vec();
    askers.push(instructor.clone());
    askers.push(ta.clone());

    let mut records = Vec::new();
    for at in timestamps(&mut rng, random) {
        let user = askers.choose(&mut rng).unwrap().clone();
        let language = ["Python", "C", "Java", "Rust"].choose(&mut rng).unwrap().to_string();
        let query = HelpQuery::new(language, maybe_text(&mut rng), maybe_text(&mut rng), text(&mut rng, 1)).unwrap();
        let resp = response(&query, &mut rng);
        let query_id = registry.save_query_at(&class_id, &user, &query, &resp, at).unwrap();
        records.push(QueryRecord {
            query_id,
            class_id: class_id.clone(),
            user_id: user,
            query,
            response: resp,
            feedback: None,
            created_at: at,
        });
    }
    for record in records.iter_mut() {
        let votes = rng.gen_range(0..3);
        for _ in 0..votes {
            let helpful = rng.gen_bool(0.6);
            registry.record_feedback(&record.query_id, &record.user_id, helpful).unwrap();
            record.feedback = Some(Feedback { helpful });
        }
    }

    Dataset {
        registry,
        class_id,
        students,
        instructor,
        ta,
        records,
    }
}
