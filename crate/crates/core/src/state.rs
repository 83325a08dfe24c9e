//! Store contents as a pure value: entities keyed by id, ingested holidays
//! and the generated tasks. Mutations return a new state or leave the old
//! one untouched.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
#[cfg(feature = "serde")]
use serde::Serialize;

use crate::calendar::BusinessCalendar;
use crate::deadline::{
    generate_tasks, Completion, DeadlineError, DeadlineRuleSet, TaskError, TaskInstance, TaskSet,
    UrgencyThresholds,
};
use crate::domain::{
    validate_against, Annotation, EntityBatch, KnownEntities, MeasureId, MicroEvent, Observation,
    Patient, PatientId, PrescriptionCourse, Profession, SeclusionMeasure, TaskId, Unit, UnitId,
    ValidationReport,
};
use crate::time::{Duration, TimeInstant};
use crate::timeline::ViewportLimits;

/// Configuration the engine needs besides the data itself.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSettings {
    /// Base calendar; ingested holidays are added on top.
    pub calendar: BusinessCalendar,
    pub ruleset: DeadlineRuleSet,
    pub thresholds: UrgencyThresholds,
    pub limits: ViewportLimits,
    /// Task horizon for measures without an end.
    pub default_horizon: Duration,
    pub professions: Vec<Profession>,
    /// Default isopsy window around `asOf`: (before, after).
    pub isopsy_window: (Duration, Duration),
    /// Default atbviz window around `asOf`: (before, after).
    pub atbviz_window: (Duration, Duration),
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            calendar: BusinessCalendar::default(),
            ruleset: DeadlineRuleSet::seclusion_default(),
            thresholds: UrgencyThresholds::default(),
            limits: ViewportLimits::default(),
            default_horizon: Duration::days(7),
            professions: ["physician", "nurse", "administrative", "judge-liaison"]
                .into_iter()
                .map(Profession::from)
                .collect(),
            isopsy_window: (Duration::days(3), Duration::days(4)),
            atbviz_window: (Duration::days(14), Duration::days(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SettingsError {
    #[error("rule {rule} names unknown profession {profession}")]
    UnknownRuleProfession {
        rule: String,
        profession: Profession,
    },
    #[error("default {0} window is outside the viewport span limits")]
    WindowOutsideLimits(&'static str),
    #[error("default task horizon must be positive")]
    NonPositiveHorizon,
}

impl EngineSettings {
    pub fn check(&self) -> Result<(), SettingsError> {
        for rule in self.ruleset.rules() {
            if !self.knows_profession(&rule.profession) {
                return Err(SettingsError::UnknownRuleProfession {
                    rule: String::from(rule.id.as_str()),
                    profession: rule.profession.clone(),
                });
            }
        }
        let (b, a) = self.isopsy_window;
        if !self.limits.admits(b + a) {
            return Err(SettingsError::WindowOutsideLimits("isopsy"));
        }
        let (b, a) = self.atbviz_window;
        if !self.limits.admits(b + a) {
            return Err(SettingsError::WindowOutsideLimits("atbviz"));
        }
        if !self.default_horizon.is_positive() {
            return Err(SettingsError::NonPositiveHorizon);
        }
        Ok(())
    }

    pub fn knows_profession(&self, p: &Profession) -> bool {
        self.professions.contains(p)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("batch rejected with {} validation issue(s)", .0.len())]
    Rejected(ValidationReport),
    #[error(transparent)]
    Deadline(#[from] DeadlineError),
}

/// Per-collection sizes of an accepted batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct EntityCounts {
    pub patients: usize,
    pub units: usize,
    pub measures: usize,
    pub prescriptions: usize,
    pub observations: usize,
    pub micro_events: usize,
    pub annotations: usize,
    pub holidays: usize,
}

impl EntityCounts {
    pub fn of(batch: &EntityBatch) -> Self {
        EntityCounts {
            patients: batch.patients.len(),
            units: batch.units.len(),
            measures: batch.measures.len(),
            prescriptions: batch.prescriptions.len(),
            observations: batch.observations.len(),
            micro_events: batch.micro_events.len(),
            annotations: batch.annotations.len(),
            holidays: batch.holidays.len(),
        }
    }
}

/// Outcome of a successful ingest, before the store stamps a revision on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestSummary {
    pub counts: EntityCounts,
    pub tasks: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClinicalState {
    units: BTreeMap<UnitId, Unit>,
    patients: BTreeMap<PatientId, Patient>,
    measures: BTreeMap<MeasureId, SeclusionMeasure>,
    prescriptions: BTreeMap<String, PrescriptionCourse>,
    observations: BTreeMap<String, Observation>,
    micro_events: BTreeMap<String, MicroEvent>,
    annotations: BTreeMap<String, Annotation>,
    holidays: BTreeSet<NaiveDate>,
    tasks: TaskSet,
}

impl KnownEntities for ClinicalState {
    fn has_unit(&self, id: &UnitId) -> bool {
        self.units.contains_key(id)
    }

    fn has_patient(&self, id: &PatientId) -> bool {
        self.patients.contains_key(id)
    }
}

impl ClinicalState {
    pub fn new() -> Self {
        ClinicalState::default()
    }

    /// Rebuilds a state from persisted entities and task completions.
    /// Completions whose task no longer exists are dropped.
    pub fn restore(
        entities: EntityBatch,
        completions: impl IntoIterator<Item = (TaskId, Completion)>,
        settings: &EngineSettings,
    ) -> Result<Self, IngestError> {
        let (mut state, _) = ClinicalState::new().ingest(entities, settings)?;
        for (id, completion) in completions {
            if let Some(task) = state.tasks.remove(&id) {
                state.tasks.insert(TaskInstance {
                    completion: Some(completion),
                    ..task
                });
            }
        }
        Ok(state)
    }

    /// Validates `batch` against itself and the current entities, then
    /// upserts everything and regenerates tasks. All or nothing: on error
    /// `self` is untouched and no new state is produced.
    pub fn ingest(
        &self,
        batch: EntityBatch,
        settings: &EngineSettings,
    ) -> Result<(ClinicalState, IngestSummary), IngestError> {
        let report = validate_against(&batch, self);
        if !report.is_empty() {
            return Err(IngestError::Rejected(report));
        }
        let counts = EntityCounts::of(&batch);
        let mut next = self.clone();
        next.units
            .extend(batch.units.into_iter().map(|u| (u.id.clone(), u)));
        next.patients
            .extend(batch.patients.into_iter().map(|p| (p.id.clone(), p)));
        next.measures
            .extend(batch.measures.into_iter().map(|m| (m.id.clone(), m)));
        next.prescriptions
            .extend(batch.prescriptions.into_iter().map(|p| (p.id.clone(), p)));
        next.observations
            .extend(batch.observations.into_iter().map(|o| (o.id.clone(), o)));
        next.micro_events
            .extend(batch.micro_events.into_iter().map(|e| (e.id.clone(), e)));
        next.annotations
            .extend(batch.annotations.into_iter().map(|a| (a.id.clone(), a)));
        next.holidays.extend(batch.holidays);
        next.regenerate_tasks(settings)?;
        let tasks = next.tasks.len();
        Ok((next, IngestSummary { counts, tasks }))
    }

    /// Regenerates every measure's tasks, keeping completions of tasks whose
    /// id survives. Holiday or unit changes reach every task this way.
    fn regenerate_tasks(&mut self, settings: &EngineSettings) -> Result<(), DeadlineError> {
        let cal = self.calendar(settings);
        let mut tasks = TaskSet::new();
        for measure in self.measures.values() {
            let unit_id = &self.patients[&measure.patient_id].unit_id;
            let horizon = measure
                .end_at
                .unwrap_or(measure.start_at + settings.default_horizon);
            for mut task in generate_tasks(measure, unit_id, &settings.ruleset, horizon, &cal)? {
                task.completion = self.tasks.get(&task.id).and_then(|t| t.completion.clone());
                tasks.insert(task);
            }
        }
        self.tasks = tasks;
        Ok(())
    }

    pub fn validate_task(
        &mut self,
        id: &TaskId,
        actor: Profession,
        at: TimeInstant,
    ) -> Result<TaskInstance, TaskError> {
        self.tasks.validate_task(id, actor, at)
    }

    /// Settings calendar plus every ingested holiday.
    pub fn calendar(&self, settings: &EngineSettings) -> BusinessCalendar {
        settings
            .calendar
            .with_holidays(self.holidays.iter().copied())
    }

    pub fn units(&self) -> impl Iterator<Item = &Unit> {
        self.units.values()
    }

    pub fn unit(&self, id: &UnitId) -> Option<&Unit> {
        self.units.get(id)
    }

    pub fn patients(&self) -> impl Iterator<Item = &Patient> {
        self.patients.values()
    }

    pub fn patient(&self, id: &PatientId) -> Option<&Patient> {
        self.patients.get(id)
    }

    pub fn measures(&self) -> impl Iterator<Item = &SeclusionMeasure> {
        self.measures.values()
    }

    pub fn measure(&self, id: &MeasureId) -> Option<&SeclusionMeasure> {
        self.measures.get(id)
    }

    pub fn prescriptions(&self) -> impl Iterator<Item = &PrescriptionCourse> {
        self.prescriptions.values()
    }

    pub fn observations(&self) -> impl Iterator<Item = &Observation> {
        self.observations.values()
    }

    pub fn observation(&self, id: &str) -> Option<&Observation> {
        self.observations.get(id)
    }

    pub fn micro_events(&self) -> impl Iterator<Item = &MicroEvent> {
        self.micro_events.values()
    }

    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.values()
    }

    pub fn holidays(&self) -> &BTreeSet<NaiveDate> {
        &self.holidays
    }

    pub fn tasks(&self) -> &TaskSet {
        &self.tasks
    }

    pub fn completions(&self) -> BTreeMap<TaskId, Completion> {
        self.tasks
            .iter()
            .filter_map(|t| t.completion.clone().map(|c| (t.id.clone(), c)))
            .collect()
    }

    /// Every entity as one ingestion document, in id order.
    pub fn to_batch(&self) -> EntityBatch {
        EntityBatch {
            patients: self.patients.values().cloned().collect(),
            units: self.units.values().cloned().collect(),
            measures: self.measures.values().cloned().collect(),
            prescriptions: self.prescriptions.values().cloned().collect(),
            observations: self.observations.values().cloned().collect(),
            micro_events: self.micro_events.values().cloned().collect(),
            annotations: self.annotations.values().cloned().collect(),
            holidays: self.holidays.iter().copied().collect(),
        }
    }
}
