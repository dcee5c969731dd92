//! Usage statistics over a class's query history: weekly active fraction,
//! hour-by-weekday heatmap, and per-user query intensity.

use std::collections::{HashMap, HashSet};

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use crate::class::{parse_timezone, ConfigError};
use crate::ids::UserId;
use crate::registry::ClassActivity;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("class roster is empty")]
    EmptyRoster,
    #[error("weeks must be at least 1")]
    NoWeeks,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyUsagePoint {
    /// 1-based week of term.
    pub week_index: u32,
    pub active_users: usize,
    pub active_fraction: f64,
    /// All queries in the week, including those by non-roster users.
    pub query_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapCell {
    /// Monday = 0.
    pub day_of_week: u8,
    pub hour: u8,
    pub count: u64,
}

/// Full 7x24 grid, Monday 00:00 first, hour varying fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub timezone: String,
    pub cells: Vec<HeatmapCell>,
}

impl Heatmap {
    pub fn get(&self, day_of_week: u8, hour: u8) -> u64 {
        self.cells[day_of_week as usize * 24 + hour as usize].count
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntensityBucket {
    pub threshold: u64,
    pub user_count: usize,
}

fn local_date(t: &DateTime<Utc>, tz: Tz) -> NaiveDate {
    t.with_timezone(&tz).date_naive()
}

/// Fraction of the roster active in each 7-day block starting at local
/// midnight of `term_start` in `timezone`.
pub fn weekly_active_fraction(
    roster: &[UserId],
    events: &[(UserId, DateTime<Utc>)],
    timezone: &str,
    term_start: NaiveDate,
    weeks: u32,
) -> Result<Vec<WeeklyUsagePoint>, AnalyticsError> {
    if weeks == 0 {
        return Err(AnalyticsError::NoWeeks);
    }
    let roster: HashSet<&UserId> = roster.iter().collect();
    if roster.is_empty() {
        return Err(AnalyticsError::EmptyRoster);
    }
    let tz = parse_timezone(timezone)?;

    let mut active: Vec<HashSet<&UserId>> = vec![HashSet::new(); weeks as usize];
    let mut counts = vec![0u64; weeks as usize];
    for (user, at) in events {
        let days = (local_date(at, tz) - term_start).num_days();
        if days < 0 {
            continue;
        }
        let week = (days / 7) as usize;
        if week >= weeks as usize {
            continue;
        }
        counts[week] += 1;
        if roster.contains(user) {
            active[week].insert(user);
        }
    }

    Ok(active
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(i, (users, query_count))| WeeklyUsagePoint {
            week_index: i as u32 + 1,
            active_users: users.len(),
            active_fraction: users.len() as f64 / roster.len() as f64,
            query_count,
        })
        .collect())
}

pub fn hour_day_heatmap(events: &[(UserId, DateTime<Utc>)], timezone: &str) -> Result<Heatmap, AnalyticsError> {
    let tz = parse_timezone(timezone)?;
    let mut grid = [[0u64; 24]; 7];
    for (_, at) in events {
        let local = at.with_timezone(&tz);
        grid[local.weekday().num_days_from_monday() as usize][local.hour() as usize] += 1;
    }
    let cells = grid
        .iter()
        .enumerate()
        .flat_map(|(day, hours)| {
            hours.iter().enumerate().map(move |(hour, &count)| HeatmapCell {
                day_of_week: day as u8,
                hour: hour as u8,
                count,
            })
        })
        .collect();
    Ok(Heatmap {
        timezone: timezone.to_string(),
        cells,
    })
}

/// For each threshold, how many users made at least that many queries.
/// Roster members with no queries count as zero-query users.
pub fn intensity_histogram(
    roster: &[UserId],
    events: &[(UserId, DateTime<Utc>)],
    thresholds: &[u64],
) -> Vec<IntensityBucket> {
    let mut per_user: HashMap<&UserId, u64> = roster.iter().map(|u| (u, 0)).collect();
    for (user, _) in events {
        *per_user.entry(user).or_default() += 1;
    }
    thresholds
        .iter()
        .map(|&threshold| IntensityBucket {
            threshold,
            user_count: per_user.values().filter(|&&n| n >= threshold).count(),
        })
        .collect()
}

impl ClassActivity {
    pub fn weekly(&self, term_start: NaiveDate, weeks: u32) -> Result<Vec<WeeklyUsagePoint>, AnalyticsError> {
        weekly_active_fraction(&self.roster, &self.events, &self.config.timezone, term_start, weeks)
    }

    pub fn heatmap(&self, timezone: Option<&str>) -> Result<Heatmap, AnalyticsError> {
        hour_day_heatmap(&self.events, timezone.unwrap_or(&self.config.timezone))
    }

    pub fn intensity(&self, thresholds: &[u64]) -> Vec<IntensityBucket> {
        intensity_histogram(&self.roster, &self.events, thresholds)
    }
}

pub mod csv {
    //! Flat CSV renderings for offline plotting.

    use super::{Heatmap, IntensityBucket, WeeklyUsagePoint};

    pub fn weekly(points: &[WeeklyUsagePoint]) -> String {
        let mut out = String::from("week_index,active_users,active_fraction,query_count\r\n");
        for p in points {
            out.push_str(&format!(
                "{},{},{},{}\r\n",
                p.week_index, p.active_users, p.active_fraction, p.query_count
            ));
        }
        out
    }

    pub fn heatmap(map: &Heatmap) -> String {
        let mut out = String::from("day_of_week,hour,count\r\n");
        for c in &map.cells {
            out.push_str(&format!("{},{},{}\r\n", c.day_of_week, c.hour, c.count));
        }
        out
    }

    pub fn intensity(buckets: &[IntensityBucket]) -> String {
        let mut out = String::from("threshold,user_count\r\n");
        for b in buckets {
            out.push_str(&format!("{},{}\r\n", b.threshold, b.user_count));
        }
        out
    }
}
