use alloc::string::String;
use alloc::vec::Vec;

use crate::time::{Duration, TimeInstant};
use crate::timeline::{Viewport, ViewportError, ViewportLimits};

/// A navigation gesture, whichever panel it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViewportOp {
    Pan(Duration),
    Zoom { factor: f64, anchor: TimeInstant },
}

impl ViewportOp {
    pub fn apply(&self, v: &Viewport, limits: &ViewportLimits) -> Result<Viewport, ViewportError> {
        match *self {
            ViewportOp::Pan(delta) => Ok(v.pan(delta)),
            ViewportOp::Zoom { factor, anchor } => v.zoom(factor, anchor, limits),
        }
    }
}

/// The components of one dashboard bound to a single shared viewport.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncGroup {
    dashboard_id: String,
    viewport: Viewport,
    limits: ViewportLimits,
    components: Vec<String>,
}

impl SyncGroup {
    pub fn new(
        dashboard_id: impl Into<String>,
        viewport: Viewport,
        limits: ViewportLimits,
        components: Vec<String>,
    ) -> Self {
        SyncGroup {
            dashboard_id: dashboard_id.into(),
            viewport,
            limits,
            components,
        }
    }

    pub fn dashboard_id(&self) -> &str {
        &self.dashboard_id
    }

    pub fn viewport(&self) -> Viewport {
        self.viewport
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    /// What a member component displays; `None` for strangers.
    pub fn viewport_of(&self, component_id: &str) -> Option<Viewport> {
        self.components
            .iter()
            .any(|c| c == component_id)
            .then_some(self.viewport)
    }
}

/// Replaces the shared viewport. On error the caller keeps `group` as is.
pub fn sync_apply(group: &SyncGroup, op: ViewportOp) -> Result<SyncGroup, ViewportError> {
    let viewport = op.apply(&group.viewport, &group.limits)?;
    Ok(SyncGroup {
        viewport,
        ..group.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn group() -> SyncGroup {
        let start = TimeInstant::parse_iso("2024-01-01T00:00:00Z").unwrap();
        let v = Viewport::new(start, start + Duration::days(15)).unwrap();
        let components = (1..=4).map(|i| format!("c{i}")).collect();
        SyncGroup::new(
            "atbviz:patient:p1",
            v,
            ViewportLimits::default(),
            components,
        )
    }

    #[test]
    fn pan_reaches_every_component() {
        let g = group();
        let moved = sync_apply(&g, ViewportOp::Pan(Duration::hours(1))).unwrap();
        for c in g.components() {
            assert_eq!(
                moved.viewport_of(c),
                Some(g.viewport().pan(Duration::hours(1)))
            );
        }
    }

    #[test]
    fn zoom_from_one_panel_is_seen_by_all() {
        let g = group();
        let anchor = g.viewport().start() + Duration::days(3);
        let z = sync_apply(
            &g,
            ViewportOp::Zoom {
                factor: 2.0,
                anchor,
            },
        )
        .unwrap();
        let third = z.viewport_of("c3").unwrap();
        for c in ["c1", "c2", "c4"] {
            assert_eq!(z.viewport_of(c), Some(third));
        }
        assert_eq!(z.viewport_of("other"), None);
    }

    #[test]
    fn invalid_zoom_leaves_group_unchanged() {
        let g = group();
        let before = g.clone();
        let anchor = g.viewport().start();
        assert_eq!(
            sync_apply(
                &g,
                ViewportOp::Zoom {
                    factor: 0.0,
                    anchor
                }
            ),
            Err(ViewportError::InvalidFactor(0.0))
        );
        assert_eq!(g, before);
    }
}
