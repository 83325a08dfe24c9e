//! Server configuration file (UTF-8 JSON).
//!
//! Every key is optional; missing keys take the engine defaults.
//!
//! ```json
//! {
//!   "timezone": "Europe/Paris",
//!   "weekendDays": ["saturday", "sunday"],
//!   "urgencyThresholds": { "criticalBelowH": 6, "warningBelowH": 24, "cautionBelowH": 48 },
//!   "viewport": { "minSpanMin": 5, "maxSpanDays": 3650 },
//!   "ruleSet": [
//!     { "id": "jld-referral", "label": "JLD referral", "profession": "administrative",
//!       "trigger": "measure-start", "offsetH": 72, "anticipationPolicy": "business-day" }
//!   ],
//!   "port": 8080,
//!   "dataDir": "data"
//! }
//! ```
//!
//! Extra keys: `professions` (profession vocabulary), `holidays` (ISO dates
//! closed in addition to ingested ones) and `horizonDays` (task horizon for
//! open-ended measures).

use std::path::{Path, PathBuf};

use chrono::{NaiveDate, Weekday};
use chrono_tz::Tz;
use clinitime_core::calendar::WeekdaySet;
use clinitime_core::deadline::Trigger;
use clinitime_core::state::SettingsError;
use clinitime_core::{
    AnticipationPolicy, BusinessCalendar, DeadlineError, DeadlineRuleSet, Duration, EngineSettings,
    Profession, TaskRule, UrgencyThresholds, ViewportError, ViewportLimits,
};
use serde::Deserialize;

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_DATA_DIR: &str = "data";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown time zone {0:?}")]
    Timezone(String),
    #[error("unknown weekday {0:?}")]
    Weekday(String),
    #[error("{0} must be a finite, positive number of hours")]
    Hours(String),
    #[error(transparent)]
    Rules(#[from] DeadlineError),
    #[error("viewport limits: {0}")]
    Viewport(#[from] ViewportError),
    #[error(transparent)]
    Settings(#[from] SettingsError),
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawConfig {
    timezone: Option<String>,
    weekend_days: Option<Vec<String>>,
    urgency_thresholds: Option<RawThresholds>,
    viewport: Option<RawViewport>,
    rule_set: Option<Vec<RawRule>>,
    port: Option<u16>,
    data_dir: Option<PathBuf>,
    professions: Option<Vec<String>>,
    #[serde(default)]
    holidays: Vec<NaiveDate>,
    horizon_days: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawThresholds {
    critical_below_h: f64,
    warning_below_h: f64,
    caution_below_h: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawViewport {
    min_span_min: u32,
    max_span_days: u32,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawRule {
    id: String,
    label: String,
    profession: String,
    #[serde(default)]
    trigger: Trigger,
    offset_h: f64,
    period_h: Option<f64>,
    #[serde(default)]
    anticipation_policy: AnticipationPolicy,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub settings: EngineSettings,
    pub port: u16,
    pub data_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            settings: EngineSettings::default(),
            port: DEFAULT_PORT,
            data_dir: PathBuf::from(DEFAULT_DATA_DIR),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Config::from_json(&text)
    }

    /// Defaults when `path` is `None`.
    pub fn load_or_default(path: Option<&Path>) -> Result<Config, ConfigError> {
        path.map_or_else(|| Ok(Config::default()), Config::load)
    }

    pub fn from_json(text: &str) -> Result<Config, ConfigError> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let mut settings = EngineSettings::default();

        let zone = match &raw.timezone {
            Some(name) => name
                .parse::<Tz>()
                .map_err(|_| ConfigError::Timezone(name.clone()))?,
            None => settings.calendar.zone(),
        };
        let weekend = match &raw.weekend_days {
            Some(days) => days
                .iter()
                .map(|d| {
                    d.parse::<Weekday>()
                        .map_err(|_| ConfigError::Weekday(d.clone()))
                })
                .collect::<Result<WeekdaySet, _>>()?,
            None => settings.calendar.weekend(),
        };
        settings.calendar = BusinessCalendar::new(zone, weekend, raw.holidays);

        if let Some(t) = raw.urgency_thresholds {
            settings.thresholds = UrgencyThresholds::new(
                hours("criticalBelowH", t.critical_below_h)?,
                hours("warningBelowH", t.warning_below_h)?,
                hours("cautionBelowH", t.caution_below_h)?,
            )?;
        }
        if let Some(v) = raw.viewport {
            settings.limits = ViewportLimits::new(
                Duration::minutes(i64::from(v.min_span_min)),
                Duration::days(i64::from(v.max_span_days)),
            )?;
        }
        if let Some(professions) = raw.professions {
            settings.professions = professions.into_iter().map(Profession::from).collect();
        }
        if let Some(rules) = raw.rule_set {
            let rules = rules
                .into_iter()
                .map(|r| {
                    let period = r.period_h.map(|h| hours("periodH", h)).transpose()?;
                    let mut rule = TaskRule::new(
                        r.id,
                        r.label,
                        r.profession,
                        hours("offsetH", r.offset_h)?,
                        period,
                        r.anticipation_policy,
                    )?;
                    rule.trigger = r.trigger;
                    Ok(rule)
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            settings.ruleset = DeadlineRuleSet::new("config", rules)?;
        }
        if let Some(days) = raw.horizon_days {
            settings.default_horizon = Duration::days(i64::from(days));
        }
        settings.check()?;

        Ok(Config {
            settings,
            port: raw.port.unwrap_or(DEFAULT_PORT),
            data_dir: raw
                .data_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR)),
        })
    }
}

fn hours(key: &str, h: f64) -> Result<Duration, ConfigError> {
    let ms = h * 3_600_000.0;
    if !ms.is_finite() || ms < 1.0 || ms > i64::MAX as f64 / 2.0 {
        return Err(ConfigError::Hours(key.to_owned()));
    }
    Ok(Duration::from_millis(ms.round() as i64))
}
