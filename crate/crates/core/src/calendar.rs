//! Business days, deadline anticipation and the grey non-business bands.
//!
//! Instants stay in UTC everywhere else; this module is the only place that
//! asks civil-time questions (which date, which weekday, which midnight), and
//! it answers them in the calendar's configured IANA zone.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use chrono::{
    Datelike, Days, LocalResult, NaiveDate, NaiveDateTime, NaiveTime, Offset, TimeZone, Weekday,
};
use chrono_tz::Tz;

use crate::time::{TimeInstant, TimeRange};
use crate::timeline::Viewport;

/// Civil years on which `is_business_day` and `anticipate` are defined.
pub const SUPPORTED_YEARS: RangeInclusive<i32> = 1970..=2100;

/// How far back `anticipate` searches before declaring the calendar degenerate.
pub const MAX_ANTICIPATION_DAYS: u64 = 366;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum CalendarError {
    #[error("civil date {0} is outside the supported years 1970-2100")]
    OutOfRange(NaiveDate),
    #[error("instant {0}ms cannot be mapped to a civil date")]
    Unrepresentable(i64),
    #[error("no business day within {MAX_ANTICIPATION_DAYS} days before {0}")]
    Exhausted(NaiveDate),
}

/// Set of weekdays, stored as a 7-bit mask (Monday = bit 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct WeekdaySet(u8);

impl WeekdaySet {
    pub const EMPTY: WeekdaySet = WeekdaySet(0);
    pub const SATURDAY_SUNDAY: WeekdaySet = WeekdaySet(0b110_0000);

    pub fn contains(self, day: Weekday) -> bool {
        self.0 & (1 << day.num_days_from_monday()) != 0
    }

    pub fn with(self, day: Weekday) -> WeekdaySet {
        WeekdaySet(self.0 | (1 << day.num_days_from_monday()))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Weekday> {
        let mut day = Weekday::Mon;
        (0..7).filter_map(move |_| {
            let d = day;
            day = day.succ();
            self.contains(d).then_some(d)
        })
    }
}

impl FromIterator<Weekday> for WeekdaySet {
    fn from_iter<I: IntoIterator<Item = Weekday>>(iter: I) -> Self {
        iter.into_iter().fold(WeekdaySet::EMPTY, WeekdaySet::with)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusinessCalendar {
    zone: Tz,
    weekend: WeekdaySet,
    holidays: BTreeSet<NaiveDate>,
}

impl Default for BusinessCalendar {
    /// Europe/Paris, Saturday and Sunday off, no holidays.
    fn default() -> Self {
        BusinessCalendar::new(chrono_tz::Europe::Paris, WeekdaySet::SATURDAY_SUNDAY, [])
    }
}

impl BusinessCalendar {
    pub fn new(
        zone: Tz,
        weekend: WeekdaySet,
        holidays: impl IntoIterator<Item = NaiveDate>,
    ) -> Self {
        BusinessCalendar {
            zone,
            weekend,
            holidays: holidays.into_iter().collect(),
        }
    }

    /// Same zone and weekend, with `extra` added to the holiday set.
    pub fn with_holidays(&self, extra: impl IntoIterator<Item = NaiveDate>) -> Self {
        let mut cal = self.clone();
        cal.holidays.extend(extra);
        cal
    }

    pub fn zone(&self) -> Tz {
        self.zone
    }

    pub fn weekend(&self) -> WeekdaySet {
        self.weekend
    }

    pub fn holidays(&self) -> &BTreeSet<NaiveDate> {
        &self.holidays
    }

    pub fn is_business_day(&self, date: NaiveDate) -> Result<bool, CalendarError> {
        check_range(date)?;
        Ok(self.is_open(date))
    }

    fn is_open(&self, date: NaiveDate) -> bool {
        !self.weekend.contains(date.weekday()) && !self.holidays.contains(&date)
    }

    fn local(&self, t: TimeInstant) -> Result<NaiveDateTime, CalendarError> {
        let utc = t
            .to_datetime()
            .ok_or(CalendarError::Unrepresentable(t.millis()))?;
        Ok(utc.with_timezone(&self.zone).naive_local())
    }

    pub fn civil_date(&self, t: TimeInstant) -> Result<NaiveDate, CalendarError> {
        self.local(t).map(|l| l.date())
    }

    /// UTC instant of a civil wall-clock reading. Repeated readings (autumn
    /// fold) resolve to the earlier instant; skipped readings (spring gap)
    /// are read with the offset in force before the transition.
    pub fn resolve_local(&self, local: NaiveDateTime) -> TimeInstant {
        let utc = match self.zone.from_local_datetime(&local) {
            LocalResult::Single(dt) | LocalResult::Ambiguous(dt, _) => dt.naive_utc(),
            LocalResult::None => {
                let before = local - chrono::Duration::hours(24);
                let offset = self.zone.offset_from_utc_datetime(&before).fix();
                local - chrono::Duration::seconds(i64::from(offset.local_minus_utc()))
            }
        };
        TimeInstant::from_millis(utc.and_utc().timestamp_millis())
    }

    /// First instant of a civil date.
    pub fn start_of_day(&self, date: NaiveDate) -> TimeInstant {
        self.resolve_local(date.and_time(NaiveTime::MIN))
    }

    /// Moves a deadline that falls on a non-business day back to the latest
    /// earlier business day, keeping its civil clock time.
    pub fn anticipate(&self, due: TimeInstant) -> Result<TimeInstant, CalendarError> {
        let local = self.local(due)?;
        let date = local.date();
        check_range(date)?;
        if self.is_open(date) {
            return Ok(due);
        }
        (1..=MAX_ANTICIPATION_DAYS)
            .filter_map(|k| date.checked_sub_days(Days::new(k)))
            .find(|d| self.is_open(*d))
            .map(|d| self.resolve_local(d.and_time(local.time())))
            .ok_or(CalendarError::Exhausted(date))
    }

    /// Maximal, sorted, disjoint intervals of `window` lying on non-business
    /// civil days. Consecutive closed days form a single band.
    pub fn non_business_bands(&self, window: &Viewport) -> Vec<TimeRange> {
        let mut bands: Vec<TimeRange> = Vec::new();
        let (Ok(first), Ok(last)) = (
            self.civil_date(window.start()),
            self.civil_date(TimeInstant::from_millis(window.end().millis() - 1)),
        ) else {
            return bands;
        };
        let mut day = first;
        let mut day_start = self.start_of_day(day);
        while day <= last {
            let Some(next) = day.succ_opt() else { break };
            let next_start = self.start_of_day(next);
            if !self.is_open(day) {
                let start = day_start.max(window.start());
                let end = next_start.min(window.end());
                if start < end {
                    match bands.last_mut() {
                        Some(prev) if prev.end == start => prev.end = end,
                        _ => bands.push(TimeRange::new(start, end)),
                    }
                }
            }
            day = next;
            day_start = next_start;
        }
        bands
    }
}

fn check_range(date: NaiveDate) -> Result<(), CalendarError> {
    if SUPPORTED_YEARS.contains(&date.year()) {
        Ok(())
    } else {
        Err(CalendarError::OutOfRange(date))
    }
}
