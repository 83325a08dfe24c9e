//! Viewport algebra shared by every panel of a dashboard, and the
//! projection of domain data into render-ready timeline items and series.

mod items;
mod series;
mod sync;
mod viewport;

pub use items::{
    filter_items, task_to_item, ColorToken, ComponentContent, DashboardComponent, ItemKind,
    LaneLabels, PayloadRef, TimelineItem, TooltipEntry,
};
pub use series::{
    series_window, ClinicalSeries, SeriesEvent, SeriesInterval, SeriesPoint, UnsortedSeries,
};
pub use sync::{sync_apply, SyncGroup, ViewportOp};
pub use viewport::{Viewport, ViewportError, ViewportLimits};
