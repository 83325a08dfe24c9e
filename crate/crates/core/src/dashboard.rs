//! Projection of a store snapshot into dashboard documents.
//!
//! Assembly is a pure function of (state, settings, scope, view, asOf,
//! options): the same inputs always produce the same document.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::Serialize;

use crate::deadline::TaskInstance;
use crate::domain::{Observation, Patient, PatientId, Profession, Theme, UnitId};
use crate::state::{ClinicalState, EngineSettings};
use crate::time::{TimeInstant, TimeRange};
use crate::timeline::{
    filter_items, series_window, task_to_item, ClinicalSeries, ColorToken, ComponentContent,
    DashboardComponent, ItemKind, LaneLabels, PayloadRef, SeriesEvent, SeriesPoint, SyncGroup,
    TimelineItem, TooltipEntry, Viewport, ViewportError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize),
    serde(tag = "type", content = "id", rename_all = "kebab-case")
)]
pub enum DashboardScope {
    Patient(PatientId),
    Unit(UnitId),
    Establishment,
}

impl DashboardScope {
    fn key(&self) -> String {
        match self {
            DashboardScope::Patient(id) => format!("patient:{id}"),
            DashboardScope::Unit(id) => format!("unit:{id}"),
            DashboardScope::Establishment => String::from("establishment"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "kebab-case"))]
pub enum DashboardView {
    /// Seclusion task tracking.
    #[default]
    Isopsy,
    /// Anti-infective treatment review, patient scope only.
    Atbviz,
}

impl DashboardView {
    pub fn as_str(self) -> &'static str {
        match self {
            DashboardView::Isopsy => "isopsy",
            DashboardView::Atbviz => "atbviz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct DashboardOptions {
    pub use_anticipated: bool,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub profession_filter: Option<Profession>,
    /// Replaces the default window when set.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub viewport: Option<Viewport>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct DashboardDoc {
    pub dashboard_id: String,
    pub scope: DashboardScope,
    pub view: DashboardView,
    pub as_of: TimeInstant,
    pub options: DashboardOptions,
    pub viewport: Viewport,
    pub components: Vec<DashboardComponent>,
    pub background_bands: Vec<TimeRange>,
}

impl DashboardDoc {
    /// The single viewport every component of this document navigates with.
    pub fn sync_group(&self, settings: &EngineSettings) -> SyncGroup {
        SyncGroup::new(
            self.dashboard_id.clone(),
            self.viewport,
            settings.limits,
            self.components.iter().map(|c| c.id.clone()).collect(),
        )
    }

    pub fn items(&self) -> impl Iterator<Item = &TimelineItem> {
        self.components.iter().flat_map(|c| c.items())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DashboardError {
    #[error("patient {0} not found")]
    PatientNotFound(PatientId),
    #[error("unit {0} not found")]
    UnitNotFound(UnitId),
    #[error("the atbviz view is only available for a single patient")]
    InvalidView,
    #[error("unknown profession {0}")]
    UnknownProfession(Profession),
    #[error(transparent)]
    Viewport(#[from] ViewportError),
}

pub const ISOPSY_COMPONENT: &str = "isopsy-tasks";

pub fn assemble_dashboard(
    state: &ClinicalState,
    settings: &EngineSettings,
    scope: &DashboardScope,
    view: DashboardView,
    as_of: TimeInstant,
    options: &DashboardOptions,
) -> Result<DashboardDoc, DashboardError> {
    match scope {
        DashboardScope::Patient(id) if state.patient(id).is_none() => {
            return Err(DashboardError::PatientNotFound(id.clone()))
        }
        DashboardScope::Unit(id) if state.unit(id).is_none() => {
            return Err(DashboardError::UnitNotFound(id.clone()))
        }
        _ => {}
    }
    if view == DashboardView::Atbviz && !matches!(scope, DashboardScope::Patient(_)) {
        return Err(DashboardError::InvalidView);
    }
    if let Some(p) = &options.profession_filter {
        if !settings.knows_profession(p) {
            return Err(DashboardError::UnknownProfession(p.clone()));
        }
    }

    let viewport = match options.viewport {
        Some(v) => Viewport::within(v.start(), v.end(), &settings.limits)?,
        None => {
            let (before, after) = match view {
                DashboardView::Isopsy => settings.isopsy_window,
                DashboardView::Atbviz => settings.atbviz_window,
            };
            Viewport::within(as_of - before, as_of + after, &settings.limits)?
        }
    };

    let components = match (view, scope) {
        (DashboardView::Isopsy, _) => {
            alloc::vec![isopsy_component(state, settings, scope, as_of, options)]
        }
        (DashboardView::Atbviz, DashboardScope::Patient(id)) => {
            atbviz_components(state, id, &viewport, as_of, options)
        }
        (DashboardView::Atbviz, _) => unreachable!("checked above"),
    };

    Ok(DashboardDoc {
        dashboard_id: format!("{}:{}", view.as_str(), scope.key()),
        scope: scope.clone(),
        view,
        as_of,
        options: DashboardOptions {
            viewport: None,
            ..options.clone()
        },
        viewport,
        components,
        background_bands: state.calendar(settings).non_business_bands(&viewport),
    })
}

/// Patients in scope, in lane order.
fn scoped_patients<'a>(state: &'a ClinicalState, scope: &DashboardScope) -> Vec<&'a Patient> {
    let mut patients: Vec<&Patient> = state
        .patients()
        .filter(|p| match scope {
            DashboardScope::Patient(id) => &p.id == id,
            DashboardScope::Unit(id) => &p.unit_id == id,
            DashboardScope::Establishment => true,
        })
        .collect();
    let unit_name = |p: &Patient| {
        state
            .unit(&p.unit_id)
            .map(|u| u.name.clone())
            .unwrap_or_default()
    };
    match scope {
        DashboardScope::Establishment => patients.sort_by(|a, b| {
            (unit_name(a), &a.display_name, &a.id).cmp(&(unit_name(b), &b.display_name, &b.id))
        }),
        _ => patients.sort_by(|a, b| (&a.display_name, &a.id).cmp(&(&b.display_name, &b.id))),
    }
    patients
}

fn isopsy_component(
    state: &ClinicalState,
    settings: &EngineSettings,
    scope: &DashboardScope,
    as_of: TimeInstant,
    options: &DashboardOptions,
) -> DashboardComponent {
    let patients = scoped_patients(state, scope);
    let per_patient_lanes = !matches!(scope, DashboardScope::Patient(_));

    let mut tasks: Vec<&TaskInstance> = state
        .tasks()
        .iter()
        .filter(|t| patients.iter().any(|p| p.id == t.patient_id))
        .collect();
    tasks.sort_by(|a, b| {
        (a.due_at, &a.patient_id, &a.rule_id, a.sequence).cmp(&(
            b.due_at,
            &b.patient_id,
            &b.rule_id,
            b.sequence,
        ))
    });

    let mut lanes = LaneLabels::new();
    if per_patient_lanes {
        for p in &patients {
            if state.measures().any(|m| m.patient_id == p.id) {
                lanes.push(p.id.as_str(), patient_lane_label(state, p, scope));
            }
        }
    } else {
        for rule in settings.ruleset.rules() {
            lanes.push(rule.id.as_str(), rule.label.clone());
        }
    }

    let items = tasks
        .into_iter()
        .map(|task| {
            let mut item = task_to_item(task, as_of, &settings.thresholds, options.use_anticipated);
            item.component_id = String::from(ISOPSY_COMPONENT);
            if per_patient_lanes {
                item.group = task.patient_id.to_string();
                if let Some(p) = state.patient(&task.patient_id) {
                    item.tooltip
                        .push(TooltipEntry::new("patient", p.display_name.clone()));
                }
                if let Some(u) = state.unit(&task.unit_id) {
                    item.tooltip.push(TooltipEntry::new("unit", u.name.clone()));
                }
            }
            item
        })
        .collect();
    let items = filter_items(items, options.profession_filter.as_ref(), state.tasks());

    DashboardComponent {
        id: String::from(ISOPSY_COMPONENT),
        title: String::from("Seclusion tasks"),
        theme: None,
        content: ComponentContent::Timeline { items },
        group_labels: lanes,
    }
}

fn patient_lane_label(state: &ClinicalState, p: &Patient, scope: &DashboardScope) -> String {
    match scope {
        DashboardScope::Establishment => match state.unit(&p.unit_id) {
            Some(unit) => format!("{} ({})", p.display_name, unit.name),
            None => p.display_name.clone(),
        },
        _ => p.display_name.clone(),
    }
}

fn theme_title(theme: Theme) -> &'static str {
    match theme {
        Theme::Therapeutics => "Therapeutics",
        Theme::Efficacy => "Efficacy",
        Theme::Microbiology => "Microbiological investigations",
        Theme::Tolerance => "Tolerance",
    }
}

fn atbviz_components(
    state: &ClinicalState,
    patient: &PatientId,
    viewport: &Viewport,
    as_of: TimeInstant,
    options: &DashboardOptions,
) -> Vec<DashboardComponent> {
    Theme::ALL
        .iter()
        .map(|&theme| {
            let id = format!("atbviz-{}", theme.as_str());
            let (content, lanes) = match theme {
                Theme::Therapeutics | Theme::Microbiology => {
                    let (items, lanes) = theme_items(state, patient, theme, &id, as_of);
                    let items =
                        filter_items(items, options.profession_filter.as_ref(), state.tasks());
                    (ComponentContent::Timeline { items }, lanes)
                }
                Theme::Efficacy | Theme::Tolerance => {
                    let (series, lanes) = theme_series(state, patient, theme, viewport);
                    (ComponentContent::NumericChart { series }, lanes)
                }
            };
            DashboardComponent {
                id,
                title: String::from(theme_title(theme)),
                theme: Some(theme),
                content,
                group_labels: lanes,
            }
        })
        .collect()
}

fn observations_of<'a>(
    state: &'a ClinicalState,
    patient: &PatientId,
    theme: Theme,
) -> Vec<&'a Observation> {
    let mut obs: Vec<&Observation> = state
        .observations()
        .filter(|o| &o.patient_id == patient && o.theme == theme)
        .collect();
    obs.sort_by(|a, b| (&a.code, a.at, &a.id).cmp(&(&b.code, b.at, &b.id)));
    obs
}

fn entity_item(
    id: &str,
    component_id: &str,
    group: &str,
    start: TimeInstant,
    end: Option<TimeInstant>,
    label: String,
    tooltip: Vec<TooltipEntry>,
) -> TimelineItem {
    let (kind, end) = match end {
        Some(e) if e > start => (ItemKind::Range, Some(e)),
        _ => (ItemKind::Point, None),
    };
    TimelineItem {
        id: String::from(id),
        component_id: String::from(component_id),
        group: String::from(group),
        kind,
        start,
        end,
        label,
        color_token: ColorToken::Neutral,
        tooltip,
        payload_ref: Some(PayloadRef::Entity(String::from(id))),
        validatable: false,
    }
}

const ANNOTATION_LANE: &str = "annotations";

fn theme_items(
    state: &ClinicalState,
    patient: &PatientId,
    theme: Theme,
    component_id: &str,
    as_of: TimeInstant,
) -> (Vec<TimelineItem>, LaneLabels) {
    let mut items = Vec::new();
    let mut lanes = LaneLabels::new();

    if theme == Theme::Therapeutics {
        lanes.push("prescriptions", "Prescriptions");
        for rx in state.prescriptions().filter(|rx| &rx.patient_id == patient) {
            // an open course is drawn up to asOf
            let end = rx.end_at.or((as_of > rx.start_at).then_some(as_of));
            let tooltip = alloc::vec![
                TooltipEntry::new("drug", rx.drug_label.clone()),
                TooltipEntry::new("startAt", rx.start_at.to_iso()),
                TooltipEntry::new(
                    "endAt",
                    rx.end_at
                        .map_or_else(|| String::from("ongoing"), |e| e.to_iso())
                ),
            ];
            items.push(entity_item(
                &rx.id,
                component_id,
                "prescriptions",
                rx.start_at,
                end,
                rx.drug_label.clone(),
                tooltip,
            ));
        }
    } else {
        lanes.push("samples", "Samples");
        for ev in state.micro_events().filter(|e| &e.patient_id == patient) {
            let mut tooltip = alloc::vec![
                TooltipEntry::new("sample", ev.label.clone()),
                TooltipEntry::new("sampledAt", ev.sampled_at.to_iso()),
                TooltipEntry::new(
                    "resultAt",
                    ev.result_at
                        .map_or_else(|| String::from("pending"), |r| r.to_iso())
                ),
            ];
            if let Some(org) = &ev.organism {
                tooltip.push(TooltipEntry::new("organism", org.clone()));
            }
            let label = match &ev.organism {
                Some(org) => format!("{}: {}", ev.label, org),
                None => ev.label.clone(),
            };
            items.push(entity_item(
                &ev.id,
                component_id,
                "samples",
                ev.sampled_at,
                ev.result_at,
                label,
                tooltip,
            ));
        }
    }

    for o in observations_of(state, patient, theme) {
        let lane = format!("observation:{}", o.code);
        lanes.push(lane.clone(), o.code.clone());
        let tooltip = alloc::vec![
            TooltipEntry::new("code", o.code.clone()),
            TooltipEntry::new("value", format!("{} {}", o.value, o.unit)),
            TooltipEntry::new("at", o.at.to_iso()),
        ];
        items.push(entity_item(
            &o.id,
            component_id,
            &lane,
            o.at,
            None,
            format!("{} {}", o.value, o.unit),
            tooltip,
        ));
    }

    for a in state
        .annotations()
        .filter(|a| &a.patient_id == patient && a.effective_theme() == theme)
    {
        lanes.push(ANNOTATION_LANE, "Annotations");
        let tooltip = alloc::vec![
            TooltipEntry::new("text", a.text.clone()),
            TooltipEntry::new("author", a.author_role.to_string()),
            TooltipEntry::new("at", a.at.to_iso()),
        ];
        items.push(entity_item(
            &a.id,
            component_id,
            ANNOTATION_LANE,
            a.at,
            None,
            a.text.clone(),
            tooltip,
        ));
    }

    items.sort_by(|a, b| (a.start, &a.id).cmp(&(b.start, &b.id)));
    (items, lanes)
}

fn theme_series(
    state: &ClinicalState,
    patient: &PatientId,
    theme: Theme,
    viewport: &Viewport,
) -> (Vec<ClinicalSeries>, LaneLabels) {
    let mut by_code: BTreeMap<&str, Vec<&Observation>> = BTreeMap::new();
    for o in observations_of(state, patient, theme) {
        by_code.entry(o.code.as_str()).or_default().push(o);
    }
    let mut lanes = LaneLabels::new();
    let mut series = Vec::new();
    for (code, obs) in by_code {
        lanes.push(code, code);
        // same code may carry several units; the first one names the axis
        let full = ClinicalSeries::Numeric {
            key: String::from(code),
            label: String::from(code),
            unit: obs[0].unit.clone(),
            points: obs
                .iter()
                .map(|o| SeriesPoint {
                    at: o.at,
                    value: o.value,
                    source_id: o.id.clone(),
                })
                .collect(),
        };
        series.push(series_window(&full, viewport).expect("observations sorted by time"));
    }

    let mut notes: Vec<SeriesEvent> = state
        .annotations()
        .filter(|a| &a.patient_id == patient && a.effective_theme() == theme)
        .map(|a| SeriesEvent {
            at: a.at,
            label: a.text.clone(),
            source_id: a.id.clone(),
        })
        .collect();
    if !notes.is_empty() {
        notes.sort_by(|a, b| (a.at, &a.source_id).cmp(&(b.at, &b.source_id)));
        lanes.push(ANNOTATION_LANE, "Annotations");
        let all = ClinicalSeries::Events {
            key: String::from(ANNOTATION_LANE),
            label: String::from("Annotations"),
            events: notes,
        };
        series.push(series_window(&all, viewport).expect("annotations sorted by time"));
    }
    (series, lanes)
}
