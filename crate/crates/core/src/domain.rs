//! Immutable clinical entities and the referential checks run on every batch.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::time::TimeInstant;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(String::from(s))
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(PatientId);
string_id!(UnitId);
string_id!(MeasureId);
string_id!(
    /// Identifier of a rule inside a [`crate::DeadlineRuleSet`].
    RuleId
);
string_id!(
    /// Deterministic task identifier, see [`crate::deadline::task_id`].
    TaskId
);
string_id!(
    /// Professional role code. The vocabulary is configuration, not a closed enum.
    Profession
);

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct Unit {
    pub id: UnitId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct Patient {
    pub id: PatientId,
    pub display_name: String,
    pub unit_id: UnitId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum MeasureKind {
    Isolation,
    Restraint,
}

impl MeasureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasureKind::Isolation => "isolation",
            MeasureKind::Restraint => "restraint",
        }
    }
}

/// A seclusion episode; the anchor of every generated task.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct SeclusionMeasure {
    pub id: MeasureId,
    pub patient_id: PatientId,
    pub kind: MeasureKind,
    pub start_at: TimeInstant,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub end_at: Option<TimeInstant>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct PrescriptionCourse {
    pub id: String,
    pub patient_id: PatientId,
    pub drug_label: String,
    pub start_at: TimeInstant,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub end_at: Option<TimeInstant>,
}

/// Thematic grouping of the anti-infective review dashboard, in render order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum Theme {
    Therapeutics,
    Efficacy,
    Microbiology,
    Tolerance,
}

impl Theme {
    pub const ALL: [Theme; 4] = [
        Theme::Therapeutics,
        Theme::Efficacy,
        Theme::Microbiology,
        Theme::Tolerance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theme::Therapeutics => "therapeutics",
            Theme::Efficacy => "efficacy",
            Theme::Microbiology => "microbiology",
            Theme::Tolerance => "tolerance",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct Observation {
    pub id: String,
    pub patient_id: PatientId,
    pub code: String,
    pub value: f64,
    pub unit: String,
    pub at: TimeInstant,
    pub theme: Theme,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct MicroEvent {
    pub id: String,
    pub patient_id: PatientId,
    pub label: String,
    pub sampled_at: TimeInstant,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub result_at: Option<TimeInstant>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub organism: Option<String>,
}

/// Free-text note. Without an explicit theme it lands in the therapeutics lane.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase")
)]
pub struct Annotation {
    pub id: String,
    pub patient_id: PatientId,
    pub text: String,
    pub at: TimeInstant,
    pub author_role: Profession,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub theme: Option<Theme>,
}

impl Annotation {
    pub fn effective_theme(&self) -> Theme {
        self.theme.unwrap_or(Theme::Therapeutics)
    }
}

/// One ingestion document. Every collection is optional on the wire.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "camelCase", default, deny_unknown_fields)
)]
pub struct EntityBatch {
    pub patients: Vec<Patient>,
    pub units: Vec<Unit>,
    pub measures: Vec<SeclusionMeasure>,
    pub prescriptions: Vec<PrescriptionCourse>,
    pub observations: Vec<Observation>,
    pub micro_events: Vec<MicroEvent>,
    pub annotations: Vec<Annotation>,
    pub holidays: Vec<NaiveDate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub enum EntityKind {
    Unit,
    Patient,
    Measure,
    Prescription,
    Observation,
    MicroEvent,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize),
    serde(
        tag = "kind",
        rename_all = "kebab-case",
        rename_all_fields = "camelCase"
    )
)]
pub enum ValidationIssue {
    DanglingReference {
        entity: EntityKind,
        id: String,
        field: &'static str,
        target: String,
    },
    DuplicateId {
        entity: EntityKind,
        id: String,
    },
    IntervalViolation {
        entity: EntityKind,
        id: String,
        detail: &'static str,
    },
    InvalidValue {
        entity: EntityKind,
        id: String,
        detail: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }
}

/// Entities already held by a store, against which batch references resolve.
pub trait KnownEntities {
    fn has_unit(&self, id: &UnitId) -> bool;
    fn has_patient(&self, id: &PatientId) -> bool;
}

struct Nothing;

impl KnownEntities for Nothing {
    fn has_unit(&self, _: &UnitId) -> bool {
        false
    }
    fn has_patient(&self, _: &PatientId) -> bool {
        false
    }
}

/// Checks a self-contained batch: every reference must resolve inside it.
pub fn validate_entity_graph(batch: &EntityBatch) -> ValidationReport {
    validate_against(batch, &Nothing)
}

/// Checks a batch whose references may also resolve to `known` entities.
pub fn validate_against<K: KnownEntities + ?Sized>(
    batch: &EntityBatch,
    known: &K,
) -> ValidationReport {
    let mut issues = Vec::new();

    let unit_ids = collect_ids(
        &batch.units,
        |u| u.id.as_str(),
        EntityKind::Unit,
        &mut issues,
    );
    let patient_ids = collect_ids(
        &batch.patients,
        |p| p.id.as_str(),
        EntityKind::Patient,
        &mut issues,
    );
    let unit_known = |id: &UnitId| unit_ids.contains(id.as_str()) || known.has_unit(id);
    let patient_known = |id: &PatientId| patient_ids.contains(id.as_str()) || known.has_patient(id);

    for p in &batch.patients {
        if !unit_known(&p.unit_id) {
            issues.push(dangling(
                EntityKind::Patient,
                p.id.as_str(),
                "unitId",
                p.unit_id.as_str(),
            ));
        }
    }

    collect_ids(
        &batch.measures,
        |m| m.id.as_str(),
        EntityKind::Measure,
        &mut issues,
    );
    for m in &batch.measures {
        if !patient_known(&m.patient_id) {
            issues.push(dangling(
                EntityKind::Measure,
                m.id.as_str(),
                "patientId",
                m.patient_id.as_str(),
            ));
        }
        if matches!(m.end_at, Some(end) if end <= m.start_at) {
            issues.push(ValidationIssue::IntervalViolation {
                entity: EntityKind::Measure,
                id: m.id.as_str().into(),
                detail: "endAt must be after startAt",
            });
        }
    }

    collect_ids(
        &batch.prescriptions,
        |p| p.id.as_str(),
        EntityKind::Prescription,
        &mut issues,
    );
    for p in &batch.prescriptions {
        if !patient_known(&p.patient_id) {
            issues.push(dangling(
                EntityKind::Prescription,
                &p.id,
                "patientId",
                p.patient_id.as_str(),
            ));
        }
        if matches!(p.end_at, Some(end) if end < p.start_at) {
            issues.push(ValidationIssue::IntervalViolation {
                entity: EntityKind::Prescription,
                id: p.id.clone(),
                detail: "endAt must not precede startAt",
            });
        }
    }

    collect_ids(
        &batch.observations,
        |o| o.id.as_str(),
        EntityKind::Observation,
        &mut issues,
    );
    for o in &batch.observations {
        if !patient_known(&o.patient_id) {
            issues.push(dangling(
                EntityKind::Observation,
                &o.id,
                "patientId",
                o.patient_id.as_str(),
            ));
        }
        if !o.value.is_finite() {
            issues.push(ValidationIssue::InvalidValue {
                entity: EntityKind::Observation,
                id: o.id.clone(),
                detail: "value must be finite",
            });
        }
    }

    collect_ids(
        &batch.micro_events,
        |e| e.id.as_str(),
        EntityKind::MicroEvent,
        &mut issues,
    );
    for e in &batch.micro_events {
        if !patient_known(&e.patient_id) {
            issues.push(dangling(
                EntityKind::MicroEvent,
                &e.id,
                "patientId",
                e.patient_id.as_str(),
            ));
        }
        if matches!(e.result_at, Some(r) if r < e.sampled_at) {
            issues.push(ValidationIssue::IntervalViolation {
                entity: EntityKind::MicroEvent,
                id: e.id.clone(),
                detail: "resultAt must not precede sampledAt",
            });
        }
    }

    collect_ids(
        &batch.annotations,
        |a| a.id.as_str(),
        EntityKind::Annotation,
        &mut issues,
    );
    for a in &batch.annotations {
        if !patient_known(&a.patient_id) {
            issues.push(dangling(
                EntityKind::Annotation,
                &a.id,
                "patientId",
                a.patient_id.as_str(),
            ));
        }
        if a.text.trim().is_empty() {
            issues.push(ValidationIssue::InvalidValue {
                entity: EntityKind::Annotation,
                id: a.id.clone(),
                detail: "text must not be empty",
            });
        }
    }

    ValidationReport { issues }
}

fn collect_ids<'a, T>(
    items: &'a [T],
    id_of: impl Fn(&'a T) -> &'a str,
    entity: EntityKind,
    issues: &mut Vec<ValidationIssue>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for item in items {
        let id = id_of(item);
        if !seen.insert(id) {
            issues.push(ValidationIssue::DuplicateId {
                entity,
                id: id.into(),
            });
        }
    }
    seen
}

fn dangling(entity: EntityKind, id: &str, field: &'static str, target: &str) -> ValidationIssue {
    ValidationIssue::DanglingReference {
        entity,
        id: id.into(),
        field,
        target: target.into(),
    }
}
