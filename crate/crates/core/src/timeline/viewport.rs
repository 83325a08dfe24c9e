use crate::time::{Duration, TimeInstant};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ViewportError {
    #[error("viewport start must precede its end")]
    Empty,
    #[error("viewport span {span_ms}ms outside [{min_ms}ms, {max_ms}ms]")]
    SpanOutOfLimits {
        span_ms: i64,
        min_ms: i64,
        max_ms: i64,
    },
    #[error("zoom factor must be a finite positive number, got {0}")]
    InvalidFactor(f64),
    #[error("zoom anchor lies outside the viewport")]
    AnchorOutside,
    #[error("viewport limits need 0 < minSpan <= maxSpan")]
    InvalidLimits,
}

/// Allowed viewport spans. Defaults: 5 minutes to 10 years (3650 days).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewportLimits {
    min_span: Duration,
    max_span: Duration,
}

impl Default for ViewportLimits {
    fn default() -> Self {
        ViewportLimits {
            min_span: Duration::minutes(5),
            max_span: Duration::days(3650),
        }
    }
}

impl ViewportLimits {
    pub fn new(min_span: Duration, max_span: Duration) -> Result<Self, ViewportError> {
        if !min_span.is_positive() || min_span > max_span {
            return Err(ViewportError::InvalidLimits);
        }
        Ok(ViewportLimits { min_span, max_span })
    }

    pub fn min_span(&self) -> Duration {
        self.min_span
    }

    pub fn max_span(&self) -> Duration {
        self.max_span
    }

    pub fn admits(&self, span: Duration) -> bool {
        self.min_span <= span && span <= self.max_span
    }

    fn clamp(&self, span_ms: i64) -> i64 {
        span_ms.clamp(self.min_span.millis(), self.max_span.millis())
    }
}

/// Visible half-open window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Viewport {
    start: TimeInstant,
    end: TimeInstant,
}

impl Viewport {
    /// Any non-empty window. Use [`Viewport::within`] when span limits apply.
    pub fn new(start: TimeInstant, end: TimeInstant) -> Result<Self, ViewportError> {
        if start >= end {
            return Err(ViewportError::Empty);
        }
        Ok(Viewport { start, end })
    }

    pub fn within(
        start: TimeInstant,
        end: TimeInstant,
        limits: &ViewportLimits,
    ) -> Result<Self, ViewportError> {
        let v = Viewport::new(start, end)?;
        if !limits.admits(v.span()) {
            return Err(ViewportError::SpanOutOfLimits {
                span_ms: v.span().millis(),
                min_ms: limits.min_span.millis(),
                max_ms: limits.max_span.millis(),
            });
        }
        Ok(v)
    }

    pub fn start(&self) -> TimeInstant {
        self.start
    }

    pub fn end(&self) -> TimeInstant {
        self.end
    }

    pub fn span(&self) -> Duration {
        self.end - self.start
    }

    pub fn contains(&self, t: TimeInstant) -> bool {
        self.start <= t && t < self.end
    }

    /// Translation; no clamping, time scrolls without bound.
    pub fn pan(&self, delta: Duration) -> Viewport {
        Viewport {
            start: self.start + delta,
            end: self.end + delta,
        }
    }

    /// Scales the span by `1 / factor` (factor > 1 zooms in) while `anchor`
    /// keeps its relative position. The new span is clamped to `limits`.
    pub fn zoom(
        &self,
        factor: f64,
        anchor: TimeInstant,
        limits: &ViewportLimits,
    ) -> Result<Viewport, ViewportError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(ViewportError::InvalidFactor(factor));
        }
        if !self.contains(anchor) {
            return Err(ViewportError::AnchorOutside);
        }
        let span = self.span().millis();
        let target = limits.clamp(round_to_i64(span as f64 / factor));
        let ratio = (anchor - self.start).millis() as f64 / span as f64;
        // anchor must stay inside the half-open result
        let offset = round_to_i64(ratio * target as f64).min(target - 1);
        let start = anchor - Duration::from_millis(offset);
        Ok(Viewport {
            start,
            end: start + Duration::from_millis(target),
        })
    }
}

/// Round half away from zero; saturates at the i64 range.
pub(crate) fn round_to_i64(x: f64) -> i64 {
    if x >= 0.0 {
        (x + 0.5) as i64
    } else {
        -((-x + 0.5) as i64)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Viewport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Viewport", 2)?;
        st.serialize_field("start", &self.start)?;
        st.serialize_field("end", &self.end)?;
        st.end()
    }
}
