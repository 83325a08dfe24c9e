use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::Serialize;

use crate::time::TimeInstant;
use crate::timeline::Viewport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("series points are not sorted by time")]
pub struct UnsortedSeries;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct SeriesPoint {
    pub at: TimeInstant,
    pub value: f64,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct SeriesInterval {
    pub start: TimeInstant,
    /// Open-ended when absent.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub end: Option<TimeInstant>,
    pub label: String,
    pub source_id: String,
    pub clipped: bool,
}

impl SeriesInterval {
    fn intersects(&self, v: &Viewport) -> bool {
        match self.end {
            Some(end) if end == self.start => v.contains(self.start),
            Some(end) => self.start < v.end() && end > v.start(),
            None => self.start < v.end(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize), serde(rename_all = "camelCase"))]
pub struct SeriesEvent {
    pub at: TimeInstant,
    pub label: String,
    pub source_id: String,
}

/// Chart-ready clinical data: numeric samples, intervals, or instant events.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize),
    serde(
        tag = "type",
        rename_all = "kebab-case",
        rename_all_fields = "camelCase"
    )
)]
pub enum ClinicalSeries {
    Numeric {
        key: String,
        label: String,
        unit: String,
        points: Vec<SeriesPoint>,
    },
    Intervals {
        key: String,
        label: String,
        intervals: Vec<SeriesInterval>,
    },
    Events {
        key: String,
        label: String,
        events: Vec<SeriesEvent>,
    },
}

impl ClinicalSeries {
    pub fn key(&self) -> &str {
        match self {
            ClinicalSeries::Numeric { key, .. }
            | ClinicalSeries::Intervals { key, .. }
            | ClinicalSeries::Events { key, .. } => key,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ClinicalSeries::Numeric { points, .. } => points.len(),
            ClinicalSeries::Intervals { intervals, .. } => intervals.len(),
            ClinicalSeries::Events { events, .. } => events.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_sorted(&self) -> bool {
        match self {
            ClinicalSeries::Numeric { points, .. } => points.windows(2).all(|w| w[0].at <= w[1].at),
            ClinicalSeries::Intervals { intervals, .. } => {
                intervals.windows(2).all(|w| w[0].start <= w[1].start)
            }
            ClinicalSeries::Events { events, .. } => events.windows(2).all(|w| w[0].at <= w[1].at),
        }
    }
}

/// Restricts a series to `v`. Numeric series also keep the nearest sample on
/// each side of the window so that lines run to the panel edges.
pub fn series_window(
    series: &ClinicalSeries,
    v: &Viewport,
) -> Result<ClinicalSeries, UnsortedSeries> {
    if !series.is_sorted() {
        return Err(UnsortedSeries);
    }
    Ok(match series {
        ClinicalSeries::Numeric {
            key,
            label,
            unit,
            points,
        } => {
            let lo = points.partition_point(|p| p.at < v.start());
            let hi = points.partition_point(|p| p.at < v.end());
            let from = lo.saturating_sub(1);
            let to = (hi + 1).min(points.len());
            ClinicalSeries::Numeric {
                key: key.clone(),
                label: label.clone(),
                unit: unit.clone(),
                points: points[from..to].to_vec(),
            }
        }
        ClinicalSeries::Intervals {
            key,
            label,
            intervals,
        } => ClinicalSeries::Intervals {
            key: key.clone(),
            label: label.clone(),
            intervals: intervals
                .iter()
                .filter(|i| i.intersects(v))
                .map(|i| SeriesInterval {
                    clipped: false,
                    ..i.clone()
                })
                .collect(),
        },
        ClinicalSeries::Events { key, label, events } => ClinicalSeries::Events {
            key: key.clone(),
            label: label.clone(),
            events: events
                .iter()
                .filter(|e| v.contains(e.at))
                .cloned()
                .collect(),
        },
    })
}
