use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::Serialize;

use crate::deadline::{classify_urgency, TaskInstance, TaskSet, UrgencyBand, UrgencyThresholds};
use crate::domain::{Profession, TaskId, Theme};
use crate::time::TimeInstant;
use crate::timeline::series::ClinicalSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "kebab-case"))]
pub enum ItemKind {
    Range,
    Point,
    Background,
}

/// Semantic colour; the concrete palette belongs to the renderer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "kebab-case"))]
pub enum ColorToken {
    Overdue,
    Critical,
    Warning,
    Caution,
    Safe,
    Done,
    Neutral,
    BandGrey,
}

impl From<UrgencyBand> for ColorToken {
    fn from(band: UrgencyBand) -> Self {
        match band {
            UrgencyBand::Overdue => ColorToken::Overdue,
            UrgencyBand::Critical => ColorToken::Critical,
            UrgencyBand::Warning => ColorToken::Warning,
            UrgencyBand::Caution => ColorToken::Caution,
            UrgencyBand::Safe => ColorToken::Safe,
            UrgencyBand::Done => ColorToken::Done,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct TooltipEntry {
    pub key: String,
    pub value: String,
}

impl TooltipEntry {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        TooltipEntry {
            key: key.into(),
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize),
    serde(tag = "type", content = "id", rename_all = "kebab-case")
)]
pub enum PayloadRef {
    Task(TaskId),
    Entity(String),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct TimelineItem {
    pub id: String,
    pub component_id: String,
    pub group: String,
    pub kind: ItemKind,
    pub start: TimeInstant,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub end: Option<TimeInstant>,
    pub label: String,
    pub color_token: ColorToken,
    pub tooltip: Vec<TooltipEntry>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub payload_ref: Option<PayloadRef>,
    pub validatable: bool,
}

impl TimelineItem {
    /// Ranges and backgrounds need an end after their start; validatable
    /// items must point at a task.
    pub fn is_well_formed(&self) -> bool {
        let extent_ok = match self.kind {
            ItemKind::Point => true,
            ItemKind::Range | ItemKind::Background => matches!(self.end, Some(e) if e > self.start),
        };
        let payload_ok = !self.validatable || matches!(self.payload_ref, Some(PayloadRef::Task(_)));
        extent_ok && payload_ok
    }

    pub fn task_id(&self) -> Option<&TaskId> {
        match &self.payload_ref {
            Some(PayloadRef::Task(id)) => Some(id),
            _ => None,
        }
    }
}

/// Point item at the task's effective due instant, coloured by urgency.
pub fn task_to_item(
    task: &TaskInstance,
    now: TimeInstant,
    th: &UrgencyThresholds,
    use_anticipated: bool,
) -> TimelineItem {
    let band = classify_urgency(task, now, th, use_anticipated);
    let mut tooltip = alloc::vec![
        TooltipEntry::new("label", task.label.clone()),
        TooltipEntry::new("profession", task.profession.to_string()),
        TooltipEntry::new("dueAt", task.due_at.to_iso()),
        TooltipEntry::new("anticipatedDueAt", task.anticipated_due_at.to_iso()),
        TooltipEntry::new("status", task.status().as_str()),
    ];
    if let Some(c) = &task.completion {
        tooltip.push(TooltipEntry::new("completedAt", c.at.to_iso()));
        tooltip.push(TooltipEntry::new("completedBy", c.by.to_string()));
    }
    TimelineItem {
        id: task.id.to_string(),
        component_id: String::new(),
        group: task.rule_id.to_string(),
        kind: ItemKind::Point,
        start: task.effective_due(use_anticipated),
        end: None,
        label: task.label.clone(),
        color_token: band.into(),
        tooltip,
        payload_ref: Some(PayloadRef::Task(task.id.clone())),
        validatable: task.is_pending(),
    }
}

/// Keeps every non-task item, and the task items owned by `profession`.
/// With no profession the input is returned unchanged.
pub fn filter_items(
    items: Vec<TimelineItem>,
    profession: Option<&Profession>,
    tasks: &TaskSet,
) -> Vec<TimelineItem> {
    let Some(profession) = profession else {
        return items;
    };
    items
        .into_iter()
        .filter(|item| match item.task_id() {
            None => true,
            Some(id) => tasks.get(id).is_some_and(|t| &t.profession == profession),
        })
        .collect()
}

/// Lane key -> display label, in lane order. Serialized as a JSON object.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaneLabels(Vec<(String, String)>);

impl LaneLabels {
    pub fn new() -> Self {
        LaneLabels::default()
    }

    /// Appends a lane; a key already present keeps its first label.
    pub fn push(&mut self, key: impl Into<String>, label: impl Into<String>) {
        let key = key.into();
        if self.get(&key).is_none() {
            self.0.push((key, label.into()));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(feature = "serde")]
impl Serialize for LaneLabels {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize),
    serde(tag = "kind", rename_all = "kebab-case")
)]
pub enum ComponentContent {
    Timeline { items: Vec<TimelineItem> },
    NumericChart { series: Vec<ClinicalSeries> },
}

/// One panel of a dashboard. Every panel of a dashboard shares its viewport.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct DashboardComponent {
    pub id: String,
    pub title: String,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub theme: Option<Theme>,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub content: ComponentContent,
    pub group_labels: LaneLabels,
}

impl DashboardComponent {
    pub fn items(&self) -> &[TimelineItem] {
        match &self.content {
            ComponentContent::Timeline { items } => items,
            ComponentContent::NumericChart { .. } => &[],
        }
    }

    pub fn series(&self) -> &[ClinicalSeries] {
        match &self.content {
            ComponentContent::NumericChart { series } => series,
            ComponentContent::Timeline { .. } => &[],
        }
    }
}
