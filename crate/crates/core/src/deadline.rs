//! Rule engine: seclusion measure + rule set => dated tasks, urgency bands,
//! and the pending -> completed transition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::calendar::{BusinessCalendar, CalendarError};
use crate::domain::{MeasureId, PatientId, Profession, RuleId, SeclusionMeasure, TaskId, UnitId};
use crate::time::{Duration, TimeInstant};

/// Upper bound on occurrences a single periodic rule may produce per measure.
pub const MAX_OCCURRENCES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeadlineError {
    #[error("rule {0}: offset must be strictly positive")]
    NonPositiveOffset(RuleId),
    #[error("rule {0}: period must be strictly positive")]
    NonPositivePeriod(RuleId),
    #[error("rule id {0} appears more than once in the rule set")]
    DuplicateRule(RuleId),
    #[error("urgency thresholds must satisfy 0 < critical < warning < caution")]
    InvalidThresholds,
    #[error("horizon must lie after the measure start")]
    InvalidHorizon,
    #[error("rule {0} would produce more than {MAX_OCCURRENCES} occurrences")]
    TooManyOccurrences(RuleId),
    #[error(transparent)]
    Calendar(#[from] CalendarError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskError {
    #[error("task {0} not found")]
    NotFound(TaskId),
    #[error("task {0} is already completed")]
    AlreadyCompleted(TaskId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum Trigger {
    #[default]
    MeasureStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum AnticipationPolicy {
    #[default]
    None,
    BusinessDay,
}

/// Template turning a measure into one task (`period` absent) or a periodic
/// series of tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRule {
    pub id: RuleId,
    pub label: String,
    pub profession: Profession,
    pub trigger: Trigger,
    offset: Duration,
    period: Option<Duration>,
    pub anticipation: AnticipationPolicy,
}

impl TaskRule {
    pub fn new(
        id: impl Into<RuleId>,
        label: impl Into<String>,
        profession: impl Into<Profession>,
        offset: Duration,
        period: Option<Duration>,
        anticipation: AnticipationPolicy,
    ) -> Result<Self, DeadlineError> {
        let id = id.into();
        if !offset.is_positive() {
            return Err(DeadlineError::NonPositiveOffset(id));
        }
        if matches!(period, Some(p) if !p.is_positive()) {
            return Err(DeadlineError::NonPositivePeriod(id));
        }
        Ok(TaskRule {
            id,
            label: label.into(),
            profession: profession.into(),
            trigger: Trigger::MeasureStart,
            offset,
            period,
            anticipation,
        })
    }

    pub fn offset(&self) -> Duration {
        self.offset
    }

    pub fn period(&self) -> Option<Duration> {
        self.period
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlineRuleSet {
    pub id: String,
    rules: Vec<TaskRule>,
}

impl DeadlineRuleSet {
    pub fn new(id: impl Into<String>, rules: Vec<TaskRule>) -> Result<Self, DeadlineError> {
        for (i, r) in rules.iter().enumerate() {
            if rules[..i].iter().any(|o| o.id == r.id) {
                return Err(DeadlineError::DuplicateRule(r.id.clone()));
            }
        }
        Ok(DeadlineRuleSet {
            id: id.into(),
            rules,
        })
    }

    pub fn empty() -> Self {
        DeadlineRuleSet {
            id: String::from("empty"),
            rules: Vec::new(),
        }
    }

    /// Illustrative seclusion workflow: periodic prescription renewal every
    /// 12h (physician), judge referral at 72h (administrative) and hearing
    /// preparation at 24h (judge liaison). Configuration, not legal ground truth.
    pub fn seclusion_default() -> Self {
        let rules = [
            TaskRule::new(
                "pm-renewal",
                "Prescription médicale (PM) renewal",
                "physician",
                Duration::hours(12),
                Some(Duration::hours(12)),
                AnticipationPolicy::None,
            ),
            TaskRule::new(
                "jld-hearing-prep",
                "JLD hearing preparation",
                "judge-liaison",
                Duration::hours(24),
                None,
                AnticipationPolicy::BusinessDay,
            ),
            TaskRule::new(
                "jld-referral",
                "JLD referral",
                "administrative",
                Duration::hours(72),
                None,
                AnticipationPolicy::BusinessDay,
            ),
        ];
        let rules = rules.into_iter().map(|r| r.expect("static rule")).collect();
        DeadlineRuleSet::new("seclusion-default", rules).expect("unique ids")
    }

    pub fn rules(&self) -> &[TaskRule] {
        &self.rules
    }

    pub fn rule(&self, id: &RuleId) -> Option<&TaskRule> {
        self.rules.iter().find(|r| &r.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum TaskStatus {
    Pending,
    Completed,
}

impl TaskStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskStatus::Pending => "pending",
            TaskStatus::Completed => "completed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Completion {
    pub at: TimeInstant,
    pub by: Profession,
}

/// A dated unit of work. The status is derived from `completion`, so a
/// completed task always carries its completion instant and actor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskInstance {
    pub id: TaskId,
    pub rule_id: RuleId,
    pub measure_id: MeasureId,
    pub patient_id: PatientId,
    pub unit_id: UnitId,
    pub label: String,
    pub profession: Profession,
    pub sequence: u32,
    pub due_at: TimeInstant,
    pub anticipated_due_at: TimeInstant,
    pub completion: Option<Completion>,
}

impl TaskInstance {
    pub fn status(&self) -> TaskStatus {
        if self.completion.is_some() {
            TaskStatus::Completed
        } else {
            TaskStatus::Pending
        }
    }

    pub fn is_pending(&self) -> bool {
        self.completion.is_none()
    }

    pub fn effective_due(&self, use_anticipated: bool) -> TimeInstant {
        if use_anticipated {
            self.anticipated_due_at
        } else {
            self.due_at
        }
    }

    pub fn completed(&self, by: Profession, at: TimeInstant) -> Result<TaskInstance, TaskError> {
        if self.completion.is_some() {
            return Err(TaskError::AlreadyCompleted(self.id.clone()));
        }
        Ok(TaskInstance {
            completion: Some(Completion { at, by }),
            ..self.clone()
        })
    }
}

#[cfg(feature = "serde")]
impl Serialize for TaskInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TaskInstance", 13)?;
        st.serialize_field("id", &self.id)?;
        st.serialize_field("ruleId", &self.rule_id)?;
        st.serialize_field("measureId", &self.measure_id)?;
        st.serialize_field("patientId", &self.patient_id)?;
        st.serialize_field("unitId", &self.unit_id)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("profession", &self.profession)?;
        st.serialize_field("sequence", &self.sequence)?;
        st.serialize_field("dueAt", &self.due_at)?;
        st.serialize_field("anticipatedDueAt", &self.anticipated_due_at)?;
        st.serialize_field("status", &self.status())?;
        match &self.completion {
            Some(c) => {
                st.serialize_field("completedAt", &c.at)?;
                st.serialize_field("completedBy", &c.by)?;
            }
            None => {
                st.skip_field("completedAt")?;
                st.skip_field("completedBy")?;
            }
        }
        st.end()
    }
}

pub fn task_id(measure: &MeasureId, rule: &RuleId, sequence: u32) -> TaskId {
    TaskId::new(format!("{measure}:{rule}:{sequence}"))
}

/// Expands every rule of `ruleset` against `measure` up to
/// `min(horizon_end, measure.end_at)`, inclusive.
pub fn generate_tasks(
    measure: &SeclusionMeasure,
    unit_id: &UnitId,
    ruleset: &DeadlineRuleSet,
    horizon_end: TimeInstant,
    cal: &BusinessCalendar,
) -> Result<Vec<TaskInstance>, DeadlineError> {
    if horizon_end <= measure.start_at {
        return Err(DeadlineError::InvalidHorizon);
    }
    let horizon = measure
        .end_at
        .map_or(horizon_end, |end| end.min(horizon_end));
    let mut tasks = Vec::new();
    for rule in ruleset.rules() {
        let first = measure.start_at + rule.offset;
        let mut due = first;
        let mut sequence = 1u32;
        while due <= horizon {
            let anticipated_due_at = match rule.anticipation {
                AnticipationPolicy::None => due,
                AnticipationPolicy::BusinessDay => cal.anticipate(due)?,
            };
            tasks.push(TaskInstance {
                id: task_id(&measure.id, &rule.id, sequence),
                rule_id: rule.id.clone(),
                measure_id: measure.id.clone(),
                patient_id: measure.patient_id.clone(),
                unit_id: unit_id.clone(),
                label: rule.label.clone(),
                profession: rule.profession.clone(),
                sequence,
                due_at: due,
                anticipated_due_at,
                completion: None,
            });
            let Some(period) = rule.period else { break };
            if sequence as usize >= MAX_OCCURRENCES {
                return Err(DeadlineError::TooManyOccurrences(rule.id.clone()));
            }
            sequence += 1;
            due += period;
        }
    }
    tasks.sort_by(|a, b| {
        (a.due_at, &a.rule_id, a.sequence).cmp(&(b.due_at, &b.rule_id, b.sequence))
    });
    Ok(tasks)
}

/// Severity classes from red to green, plus `Done` for completed tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum UrgencyBand {
    Overdue,
    Critical,
    Warning,
    Caution,
    Safe,
    Done,
}

impl UrgencyBand {
    /// Higher is more severe; `None` for `Done`, which sits outside the scale.
    pub fn severity(self) -> Option<u8> {
        match self {
            UrgencyBand::Overdue => Some(4),
            UrgencyBand::Critical => Some(3),
            UrgencyBand::Warning => Some(2),
            UrgencyBand::Caution => Some(1),
            UrgencyBand::Safe => Some(0),
            UrgencyBand::Done => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UrgencyBand::Overdue => "overdue",
            UrgencyBand::Critical => "critical",
            UrgencyBand::Warning => "warning",
            UrgencyBand::Caution => "caution",
            UrgencyBand::Safe => "safe",
            UrgencyBand::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrgencyThresholds {
    critical_below: Duration,
    warning_below: Duration,
    caution_below: Duration,
}

impl Default for UrgencyThresholds {
    fn default() -> Self {
        UrgencyThresholds {
            critical_below: Duration::hours(6),
            warning_below: Duration::hours(24),
            caution_below: Duration::hours(48),
        }
    }
}

impl UrgencyThresholds {
    pub fn new(
        critical_below: Duration,
        warning_below: Duration,
        caution_below: Duration,
    ) -> Result<Self, DeadlineError> {
        if !(critical_below.is_positive()
            && critical_below < warning_below
            && warning_below < caution_below)
        {
            return Err(DeadlineError::InvalidThresholds);
        }
        Ok(UrgencyThresholds {
            critical_below,
            warning_below,
            caution_below,
        })
    }

    pub fn critical_below(&self) -> Duration {
        self.critical_below
    }

    pub fn warning_below(&self) -> Duration {
        self.warning_below
    }

    pub fn caution_below(&self) -> Duration {
        self.caution_below
    }

    pub fn band_for(&self, remaining: Duration) -> UrgencyBand {
        if remaining < Duration::ZERO {
            UrgencyBand::Overdue
        } else if remaining < self.critical_below {
            UrgencyBand::Critical
        } else if remaining < self.warning_below {
            UrgencyBand::Warning
        } else if remaining < self.caution_below {
            UrgencyBand::Caution
        } else {
            UrgencyBand::Safe
        }
    }
}

pub fn classify_urgency(
    task: &TaskInstance,
    now: TimeInstant,
    th: &UrgencyThresholds,
    use_anticipated: bool,
) -> UrgencyBand {
    if !task.is_pending() {
        return UrgencyBand::Done;
    }
    th.band_for(task.effective_due(use_anticipated) - now)
}

/// Orders tasks by band severity (most severe first, completed last), then
/// by effective due instant, then by id.
pub fn prioritize<'a>(
    tasks: impl IntoIterator<Item = &'a TaskInstance>,
    now: TimeInstant,
    th: &UrgencyThresholds,
    use_anticipated: bool,
) -> Vec<(UrgencyBand, &'a TaskInstance)> {
    let mut ranked: Vec<_> = tasks
        .into_iter()
        .map(|t| (classify_urgency(t, now, th, use_anticipated), t))
        .collect();
    ranked.sort_by(|(ba, a), (bb, b)| {
        let key = |band: &UrgencyBand, t: &'a TaskInstance| {
            (
                Reverse(band.severity()),
                t.effective_due(use_anticipated),
                t.id.clone(),
            )
        };
        // None < Some(_), so Reverse puts completed tasks last
        key(ba, a).cmp(&key(bb, b))
    });
    ranked
}

/// Task instances keyed by id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaskSet {
    tasks: BTreeMap<TaskId, TaskInstance>,
}

impl TaskSet {
    pub fn new() -> Self {
        TaskSet::default()
    }

    pub fn get(&self, id: &TaskId) -> Option<&TaskInstance> {
        self.tasks.get(id)
    }

    pub fn insert(&mut self, task: TaskInstance) -> Option<TaskInstance> {
        self.tasks.insert(task.id.clone(), task)
    }

    pub fn remove(&mut self, id: &TaskId) -> Option<TaskInstance> {
        self.tasks.remove(id)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Tasks in id order.
    pub fn iter(&self) -> impl Iterator<Item = &TaskInstance> {
        self.tasks.values()
    }

    /// Marks a pending task completed. Fails without touching the set when
    /// the task is missing or already completed.
    pub fn validate_task(
        &mut self,
        id: &TaskId,
        actor: Profession,
        at: TimeInstant,
    ) -> Result<TaskInstance, TaskError> {
        let task = self
            .tasks
            .get_mut(id)
            .ok_or_else(|| TaskError::NotFound(id.clone()))?;
        *task = task.completed(actor, at)?;
        Ok(task.clone())
    }
}

impl FromIterator<TaskInstance> for TaskSet {
    fn from_iter<I: IntoIterator<Item = TaskInstance>>(iter: I) -> Self {
        TaskSet {
            tasks: iter.into_iter().map(|t| (t.id.clone(), t)).collect(),
        }
    }
}

pub fn validate_task(
    store: &mut TaskSet,
    id: &TaskId,
    actor: Profession,
    at: TimeInstant,
) -> Result<TaskInstance, TaskError> {
    store.validate_task(id, actor, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::WeekdaySet;
    use crate::domain::MeasureKind;
    use alloc::vec;

    fn at(s: &str) -> TimeInstant {
        TimeInstant::parse_iso(s).unwrap()
    }

    fn measure(start: &str, end: Option<&str>) -> SeclusionMeasure {
        SeclusionMeasure {
            id: "m1".into(),
            patient_id: "p1".into(),
            kind: MeasureKind::Isolation,
            start_at: at(start),
            end_at: end.map(at),
        }
    }

    fn utc() -> BusinessCalendar {
        BusinessCalendar::new(chrono_tz::UTC, WeekdaySet::SATURDAY_SUNDAY, [])
    }

    fn one_shot(id: &str, hours: i64, policy: AnticipationPolicy) -> TaskRule {
        TaskRule::new(
            id,
            id,
            "administrative",
            Duration::hours(hours),
            None,
            policy,
        )
        .unwrap()
    }

    fn periodic(id: &str, offset_h: i64, period_h: i64) -> TaskRule {
        TaskRule::new(
            id,
            id,
            "physician",
            Duration::hours(offset_h),
            Some(Duration::hours(period_h)),
            AnticipationPolicy::None,
        )
        .unwrap()
    }

    #[test]
    fn rule_durations_must_be_positive() {
        assert!(matches!(
            TaskRule::new(
                "r",
                "r",
                "nurse",
                Duration::ZERO,
                None,
                AnticipationPolicy::None
            ),
            Err(DeadlineError::NonPositiveOffset(_))
        ));
        assert!(matches!(
            TaskRule::new(
                "r",
                "r",
                "nurse",
                Duration::hours(1),
                Some(Duration::hours(-1)),
                AnticipationPolicy::None
            ),
            Err(DeadlineError::NonPositivePeriod(_))
        ));
        let dup = vec![
            one_shot("a", 1, AnticipationPolicy::None),
            one_shot("a", 2, AnticipationPolicy::None),
        ];
        assert!(matches!(
            DeadlineRuleSet::new("s", dup),
            Err(DeadlineError::DuplicateRule(_))
        ));
    }

    #[test]
    fn one_shot_rule_yields_single_task() {
        let rs =
            DeadlineRuleSet::new("s", vec![one_shot("jld", 72, AnticipationPolicy::None)]).unwrap();
        let m = measure("2024-01-01T00:00:00Z", None);
        let tasks = generate_tasks(
            &m,
            &"u1".into(),
            &rs,
            m.start_at + Duration::hours(96),
            &utc(),
        )
        .unwrap();
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].due_at, at("2024-01-04T00:00:00Z"));
        assert_eq!(tasks[0].sequence, 1);
        assert_eq!(tasks[0].id.as_str(), "m1:jld:1");
        assert_eq!(tasks[0].status(), TaskStatus::Pending);
    }

    #[test]
    fn periodic_rule_includes_horizon() {
        let rs = DeadlineRuleSet::new("s", vec![periodic("pm", 12, 12)]).unwrap();
        let m = measure("2024-01-01T00:00:00Z", None);
        let tasks = generate_tasks(
            &m,
            &"u1".into(),
            &rs,
            m.start_at + Duration::hours(48),
            &utc(),
        )
        .unwrap();
        let offsets: Vec<i64> = tasks
            .iter()
            .map(|t| (t.due_at - m.start_at).millis() / 3_600_000)
            .collect();
        assert_eq!(offsets, vec![12, 24, 36, 48]);
        assert_eq!(
            tasks.iter().map(|t| t.sequence).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn empty_ruleset_and_bad_horizon() {
        let m = measure("2024-01-01T00:00:00Z", None);
        let rs = DeadlineRuleSet::empty();
        assert_eq!(
            generate_tasks(
                &m,
                &"u1".into(),
                &rs,
                m.start_at + Duration::hours(1),
                &utc()
            ),
            Ok(vec![])
        );
        assert_eq!(
            generate_tasks(&m, &"u1".into(), &rs, m.start_at, &utc()),
            Err(DeadlineError::InvalidHorizon)
        );
    }

    #[test]
    fn measure_end_cuts_the_horizon() {
        let rs = DeadlineRuleSet::new("s", vec![periodic("pm", 12, 12)]).unwrap();
        let m = measure("2024-01-01T00:00:00Z", Some("2024-01-02T06:00:00Z"));
        let tasks = generate_tasks(
            &m,
            &"u1".into(),
            &rs,
            m.start_at + Duration::days(7),
            &utc(),
        )
        .unwrap();
        assert_eq!(tasks.len(), 2);
    }

    #[test]
    fn anticipation_applies_only_to_business_day_rules() {
        let rs = DeadlineRuleSet::new(
            "s",
            vec![
                one_shot("a-none", 72, AnticipationPolicy::None),
                one_shot("b-biz", 72, AnticipationPolicy::BusinessDay),
            ],
        )
        .unwrap();
        // Wednesday + 72h = Saturday 10:00
        let m = measure("2024-01-03T10:00:00Z", None);
        let tasks = generate_tasks(
            &m,
            &"u1".into(),
            &rs,
            m.start_at + Duration::days(7),
            &utc(),
        )
        .unwrap();
        assert_eq!(tasks[0].rule_id.as_str(), "a-none");
        assert_eq!(tasks[0].anticipated_due_at, tasks[0].due_at);
        assert_eq!(tasks[1].anticipated_due_at, at("2024-01-05T10:00:00Z"));
    }

    #[test]
    fn output_is_sorted_by_due_then_rule_then_sequence() {
        let rs =
            DeadlineRuleSet::new("s", vec![periodic("z", 12, 12), periodic("a", 24, 24)]).unwrap();
        let m = measure("2024-01-01T00:00:00Z", None);
        let tasks = generate_tasks(
            &m,
            &"u1".into(),
            &rs,
            m.start_at + Duration::hours(48),
            &utc(),
        )
        .unwrap();
        let ids: Vec<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(
            ids,
            vec!["m1:z:1", "m1:a:1", "m1:z:2", "m1:z:3", "m1:a:2", "m1:z:4"]
        );
    }

    #[test]
    fn runaway_periodic_rule_is_refused() {
        let r = TaskRule::new(
            "tick",
            "tick",
            "nurse",
            Duration::from_millis(1),
            Some(Duration::from_millis(1)),
            AnticipationPolicy::None,
        )
        .unwrap();
        let rs = DeadlineRuleSet::new("s", vec![r]).unwrap();
        let m = measure("2024-01-01T00:00:00Z", None);
        assert!(matches!(
            generate_tasks(
                &m,
                &"u1".into(),
                &rs,
                m.start_at + Duration::days(1),
                &utc()
            ),
            Err(DeadlineError::TooManyOccurrences(_))
        ));
    }

    fn sample_task(due: TimeInstant) -> TaskInstance {
        TaskInstance {
            id: "t1".into(),
            rule_id: "r".into(),
            measure_id: "m1".into(),
            patient_id: "p1".into(),
            unit_id: "u1".into(),
            label: "task".into(),
            profession: "nurse".into(),
            sequence: 1,
            due_at: due,
            anticipated_due_at: due,
            completion: None,
        }
    }

    #[test]
    fn urgency_examples() {
        let now = at("2024-01-10T12:00:00Z");
        let th = UrgencyThresholds::default();
        let band =
            |h: i64| classify_urgency(&sample_task(now + Duration::hours(h)), now, &th, false);
        assert_eq!(band(-1), UrgencyBand::Overdue);
        assert_eq!(band(3), UrgencyBand::Critical);
        assert_eq!(band(6), UrgencyBand::Warning);
        assert_eq!(band(30), UrgencyBand::Caution);
        assert_eq!(band(100), UrgencyBand::Safe);
        assert_eq!(band(0), UrgencyBand::Critical);
        let done = sample_task(now - Duration::hours(5))
            .completed("nurse".into(), now)
            .unwrap();
        assert_eq!(classify_urgency(&done, now, &th, false), UrgencyBand::Done);
    }

    #[test]
    fn urgency_uses_anticipated_due_when_asked() {
        let now = at("2024-01-05T12:00:00Z");
        let mut task = sample_task(at("2024-01-08T12:00:00Z"));
        task.anticipated_due_at = at("2024-01-05T14:00:00Z");
        let th = UrgencyThresholds::default();
        assert_eq!(classify_urgency(&task, now, &th, false), UrgencyBand::Safe);
        assert_eq!(
            classify_urgency(&task, now, &th, true),
            UrgencyBand::Critical
        );
    }

    #[test]
    fn thresholds_must_be_increasing() {
        assert!(UrgencyThresholds::new(
            Duration::hours(6),
            Duration::hours(6),
            Duration::hours(48)
        )
        .is_err());
        assert!(
            UrgencyThresholds::new(Duration::ZERO, Duration::hours(6), Duration::hours(48))
                .is_err()
        );
        assert!(
            UrgencyThresholds::new(Duration::hours(1), Duration::hours(2), Duration::hours(3))
                .is_ok()
        );
    }

    #[test]
    fn validation_transitions_once() {
        let t0 = at("2024-01-10T12:00:00Z");
        let mut set: TaskSet = [sample_task(t0)].into_iter().collect();
        let done = set.validate_task(&"t1".into(), "nurse".into(), t0).unwrap();
        assert_eq!(done.status(), TaskStatus::Completed);
        assert_eq!(done.completion.as_ref().unwrap().at, t0);
        assert_eq!(
            set.validate_task(&"t1".into(), "nurse".into(), t0),
            Err(TaskError::AlreadyCompleted("t1".into()))
        );
        assert_eq!(
            validate_task(&mut set, &"t999".into(), "nurse".into(), t0),
            Err(TaskError::NotFound("t999".into()))
        );
    }

    #[test]
    fn prioritize_orders_by_severity_then_due() {
        let now = at("2024-01-10T12:00:00Z");
        let mk = |id: &str, h: i64| TaskInstance {
            id: id.into(),
            ..sample_task(now + Duration::hours(h))
        };
        let done = mk("done", -10).completed("nurse".into(), now).unwrap();
        let tasks = vec![
            mk("safe", 100),
            done,
            mk("late", -2),
            mk("crit2", 5),
            mk("crit1", 1),
        ];
        let order: Vec<&str> = prioritize(&tasks, now, &UrgencyThresholds::default(), false)
            .into_iter()
            .map(|(_, t)| t.id.as_str())
            .collect();
        assert_eq!(order, vec!["late", "crit1", "crit2", "safe", "done"]);
    }

    #[test]
    fn default_ruleset_is_well_formed() {
        let rs = DeadlineRuleSet::seclusion_default();
        assert_eq!(rs.rules().len(), 3);
        assert_eq!(
            rs.rule(&"pm-renewal".into()).unwrap().period(),
            Some(Duration::hours(12))
        );
    }
}
