//! Brute-force reference implementations used to check the engine.
//!
//! Nothing here calls into the code path it checks: civil dates come
//! straight from chrono, counts from plain loops, memberships from scans.

#![allow(dead_code)]

use std::collections::HashSet;

use chrono::{Datelike, NaiveDate, TimeZone, Weekday};
use chrono_tz::Tz;

pub const HOUR_MS: i64 = 3_600_000;

/// Calendar description independent of `BusinessCalendar`.
#[derive(Debug, Clone)]
pub struct PlainCalendar {
    pub zone: Tz,
    pub weekend: Vec<Weekday>,
    pub holidays: HashSet<NaiveDate>,
}

impl PlainCalendar {
    pub fn closed(&self, d: NaiveDate) -> bool {
        self.weekend.contains(&d.weekday()) || self.holidays.contains(&d)
    }

    pub fn civil(&self, ms: i64) -> chrono::NaiveDateTime {
        chrono::DateTime::from_timestamp_millis(ms)
            .unwrap()
            .with_timezone(&self.zone)
            .naive_local()
    }
}

/// Walks back one civil day at a time until a business day is found, then
/// reads the same wall-clock time there (one hour later if it was skipped).
pub fn backward_scan(cal: &PlainCalendar, due_ms: i64) -> Option<i64> {
    let local = cal.civil(due_ms);
    let mut d = local.date();
    if !cal.closed(d) {
        return Some(due_ms);
    }
    for _ in 0..366 {
        d = d.pred_opt()?;
        if !cal.closed(d) {
            let wall = d.and_time(local.time());
            let dt = cal.zone.from_local_datetime(&wall).earliest().or_else(|| {
                cal.zone
                    .from_local_datetime(&(wall + chrono::Duration::hours(1)))
                    .earliest()
            })?;
            return Some(dt.timestamp_millis());
        }
    }
    None
}

/// Hour-by-hour scan of `[start, end)`: every UTC hour is labelled with its
/// civil date, closed hours are clipped to the window and merged. Valid for
/// zones whose offsets are whole hours.
pub fn bands_by_hour(cal: &PlainCalendar, start: i64, end: i64) -> Vec<(i64, i64)> {
    let mut out: Vec<(i64, i64)> = Vec::new();
    let mut h = start.div_euclid(HOUR_MS) * HOUR_MS;
    while h < end {
        let seg_start = h.max(start);
        let seg_end = (h + HOUR_MS).min(end);
        if cal.closed(cal.civil(h).date()) && seg_start < seg_end {
            match out.last_mut() {
                Some(last) if last.1 == seg_start => last.1 = seg_end,
                _ => out.push((seg_start, seg_end)),
            }
        }
        h += HOUR_MS;
    }
    out
}

/// Number of occurrences `start + offset + k * period <= horizon`, by iteration.
pub fn count_occurrences(start: i64, offset: i64, period: Option<i64>, horizon: i64) -> usize {
    let mut n = 0;
    let mut due = start + offset;
    while due <= horizon {
        n += 1;
        match period {
            Some(p) => due += p,
            None => break,
        }
    }
    n
}

/// Indices a windowed numeric series must keep: samples inside `[start, end)`
/// plus the last one before and the first one after.
pub fn window_indices(times: &[i64], start: i64, end: i64) -> Vec<usize> {
    let before = times.iter().rposition(|&t| t < start);
    let after = times.iter().position(|&t| t >= end);
    (0..times.len())
        .filter(|&i| (start <= times[i] && times[i] < end) || Some(i) == before || Some(i) == after)
        .collect()
}

/// 2024 French public holidays.
pub fn french_holidays_2024() -> Vec<NaiveDate> {
    [
        (1, 1),
        (4, 1),
        (5, 1),
        (5, 8),
        (5, 9),
        (5, 20),
        (7, 14),
        (8, 15),
        (11, 1),
        (11, 11),
        (12, 25),
    ]
    .into_iter()
    .map(|(m, d)| NaiveDate::from_ymd_opt(2024, m, d).unwrap())
    .collect()
}
