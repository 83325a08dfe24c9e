//! Pure algorithmic core of the clinitime dashboards.
//!
//! Everything in this crate is `no_std` (with `alloc`): the domain model,
//! the business-day calendar, the deadline rule engine, the timeline
//! viewport algebra and the dashboard assembly that projects a store
//! snapshot into render-ready documents. IO, persistence, the HTTP service
//! and the command line live in the `clinitime-service` crate.
//!
//! # Feature flags
//! - **`serde`**: `Serialize`/`Deserialize` implementations for the wire
//!   format (camelCase keys, ISO-8601 instants).

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calendar;
pub mod dashboard;
pub mod deadline;
pub mod domain;
pub mod state;
pub mod time;
pub mod timeline;

pub use calendar::{BusinessCalendar, CalendarError, WeekdaySet};
pub use dashboard::{
    assemble_dashboard, DashboardDoc, DashboardError, DashboardOptions, DashboardScope,
    DashboardView,
};
pub use deadline::{
    classify_urgency, generate_tasks, AnticipationPolicy, DeadlineError, DeadlineRuleSet,
    TaskInstance, TaskRule, TaskSet, TaskStatus, UrgencyBand, UrgencyThresholds,
};
pub use domain::{validate_entity_graph, EntityBatch, Profession, Theme, ValidationReport};
pub use state::{ClinicalState, EngineSettings, EntityCounts, IngestError, IngestSummary};
pub use time::{Duration, TimeInstant};
pub use timeline::{Viewport, ViewportError, ViewportLimits};
