//! Exact integer time: UTC instants and signed durations in milliseconds.

use alloc::string::String;
use core::fmt;
use core::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use chrono::{DateTime, SecondsFormat, Utc};

/// Milliseconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeInstant(i64);

/// Signed span of milliseconds. Negative values are legal (pan deltas).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Duration(i64);

pub const MILLIS_PER_SECOND: i64 = 1_000;
pub const MILLIS_PER_MINUTE: i64 = 60 * MILLIS_PER_SECOND;
pub const MILLIS_PER_HOUR: i64 = 60 * MILLIS_PER_MINUTE;
pub const MILLIS_PER_DAY: i64 = 24 * MILLIS_PER_HOUR;

impl TimeInstant {
    pub const EPOCH: TimeInstant = TimeInstant(0);

    pub const fn from_millis(ms: i64) -> Self {
        TimeInstant(ms)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub fn from_datetime(dt: DateTime<Utc>) -> Self {
        TimeInstant(dt.timestamp_millis())
    }

    /// `None` when the instant is outside chrono's representable range.
    pub fn to_datetime(self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp_millis(self.0)
    }

    /// Parses an RFC 3339 / ISO-8601 timestamp carrying an explicit offset
    /// (`Z` or `±hh:mm`) and normalizes it to UTC.
    pub fn parse_iso(s: &str) -> Result<Self, ParseInstantError> {
        DateTime::parse_from_rfc3339(s)
            .map(|dt| TimeInstant(dt.timestamp_millis()))
            .map_err(|_| ParseInstantError)
    }

    /// UTC rendering, `Z` suffix, fractional seconds only when non-zero.
    pub fn to_iso(self) -> String {
        match self.to_datetime() {
            Some(dt) => dt.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            None => alloc::format!("@{}ms", self.0),
        }
    }
}

impl fmt::Display for TimeInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_iso())
    }
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeRange {
    pub start: TimeInstant,
    pub end: TimeInstant,
}

impl TimeRange {
    pub fn new(start: TimeInstant, end: TimeInstant) -> Self {
        TimeRange { start, end }
    }

    pub fn contains(&self, t: TimeInstant) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration(&self) -> Duration {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("timestamp is not ISO-8601 with an explicit offset")]
pub struct ParseInstantError;

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_millis(ms: i64) -> Self {
        Duration(ms)
    }

    pub const fn seconds(s: i64) -> Self {
        Duration(s * MILLIS_PER_SECOND)
    }

    pub const fn minutes(m: i64) -> Self {
        Duration(m * MILLIS_PER_MINUTE)
    }

    pub const fn hours(h: i64) -> Self {
        Duration(h * MILLIS_PER_HOUR)
    }

    pub const fn days(d: i64) -> Self {
        Duration(d * MILLIS_PER_DAY)
    }

    pub const fn millis(self) -> i64 {
        self.0
    }

    pub const fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn checked_mul(self, k: i64) -> Option<Duration> {
        self.0.checked_mul(k).map(Duration)
    }
}

impl Add<Duration> for TimeInstant {
    type Output = TimeInstant;
    fn add(self, rhs: Duration) -> TimeInstant {
        TimeInstant(self.0 + rhs.0)
    }
}

impl AddAssign<Duration> for TimeInstant {
    fn add_assign(&mut self, rhs: Duration) {
        self.0 += rhs.0;
    }
}

impl Sub<Duration> for TimeInstant {
    type Output = TimeInstant;
    fn sub(self, rhs: Duration) -> TimeInstant {
        TimeInstant(self.0 - rhs.0)
    }
}

impl SubAssign<Duration> for TimeInstant {
    fn sub_assign(&mut self, rhs: Duration) {
        self.0 -= rhs.0;
    }
}

impl Sub for TimeInstant {
    type Output = Duration;
    fn sub(self, rhs: TimeInstant) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl Add for Duration {
    type Output = Duration;
    fn add(self, rhs: Duration) -> Duration {
        Duration(self.0 + rhs.0)
    }
}

impl Sub for Duration {
    type Output = Duration;
    fn sub(self, rhs: Duration) -> Duration {
        Duration(self.0 - rhs.0)
    }
}

impl Neg for Duration {
    type Output = Duration;
    fn neg(self) -> Duration {
        Duration(-self.0)
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::{Duration, TimeInstant};
    use alloc::string::String;
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for TimeInstant {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&self.to_iso())
        }
    }

    impl<'de> Deserialize<'de> for TimeInstant {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let raw = String::deserialize(d)?;
            TimeInstant::parse_iso(&raw).map_err(|_| {
                de::Error::custom(alloc::format!(
                    "invalid timestamp {raw:?}: expected ISO-8601 with offset"
                ))
            })
        }
    }

    impl Serialize for Duration {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_i64(self.0)
        }
    }

    impl<'de> Deserialize<'de> for Duration {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            i64::deserialize(d).map(Duration)
        }
    }
}
