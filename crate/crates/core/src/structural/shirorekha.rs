use std::collections::BTreeMap;

use super::{straightness, trace_from_rightmost, ShirorekhaKind, StraightnessReport, StructuralConfig, Termination, Trace};
use crate::error::Result;
use crate::raster::BinaryImage;

#[derive(Debug, Clone)]
pub struct ShirorekhaResult {
    pub kind: ShirorekhaKind,
    /// Present whenever a headline was accepted.
    pub trace: Option<Trace>,
    /// Column span of the trace over glyph width.
    pub span_ratio: f64,
    /// Straightness of the candidate trace, when one was long enough to test.
    pub straightness: Option<StraightnessReport>,
}

impl ShirorekhaResult {
    fn none(span_ratio: f64, straightness: Option<StraightnessReport>) -> Self {
        Self {
            kind: ShirorekhaKind::None,
            trace: None,
            span_ratio,
            straightness,
        }
    }

    /// Topmost trace row per column, if a headline was accepted.
    pub fn rows_by_col(&self) -> BTreeMap<usize, usize> {
        self.trace.as_ref().map(top_rows).unwrap_or_default()
    }
}

fn top_rows(trace: &Trace) -> BTreeMap<usize, usize> {
    let mut rows = BTreeMap::new();
    for &(r, c) in &trace.points {
        rows.entry(c)
            .and_modify(|top: &mut usize| *top = (*top).min(r))
            .or_insert(r);
    }
    rows
}

/// Traces from the rightmost pixel and decides whether the trace is a headline.
///
/// The trace must end in an open end and its upper envelope (distance below the glyph
/// top, one sample per column in trace order) must pass the straightness test. An
/// accepted trace is full or partial according to how much of the glyph width it spans.
pub fn detect_shirorekha(skel: &BinaryImage, cfg: &StructuralConfig) -> Result<ShirorekhaResult> {
    let bbox = skel.bounding_box()?;
    let trace = trace_from_rightmost(skel, cfg.max_consecutive_up)?;
    let (lo, hi) = trace.col_span();
    let span_ratio = (hi - lo + 1) as f64 / bbox.width() as f64;

    if trace.termination != Termination::OpenEnd {
        return Ok(ShirorekhaResult::none(span_ratio, None));
    }

    let rows = top_rows(&trace);
    // trace order runs right to left
    let distances: Vec<usize> = rows.values().rev().map(|&r| r - bbox.row_min).collect();
    let report = straightness(&distances, cfg.step_tol, cfg.drift_tol(distances.len()));
    if !report.is_near_straight {
        return Ok(ShirorekhaResult::none(span_ratio, Some(report)));
    }

    let kind = if span_ratio >= cfg.full_span {
        ShirorekhaKind::Full
    } else if span_ratio >= cfg.partial_span {
        ShirorekhaKind::Partial
    } else {
        ShirorekhaKind::None
    };
    if kind == ShirorekhaKind::None {
        return Ok(ShirorekhaResult::none(span_ratio, Some(report)));
    }
    Ok(ShirorekhaResult {
        kind,
        trace: Some(trace),
        span_ratio,
        straightness: Some(report),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::draw_line;

    fn canvas() -> BinaryImage {
        BinaryImage::new(100, 100)
    }

    #[test]
    fn full_headline() {
        let mut img = canvas();
        draw_line(&mut img, (2, 2), (2, 97));
        draw_line(&mut img, (2, 50), (99, 50));
        draw_line(&mut img, (99, 0), (99, 2));
        let res = detect_shirorekha(&img, &StructuralConfig::default()).unwrap();
        assert_eq!(res.kind, ShirorekhaKind::Full);
        assert!(res.span_ratio >= 0.95);
        assert!(res.trace.is_some());
    }

    #[test]
    fn partial_headline() {
        let mut img = canvas();
        // headline over the right 45% of a 100 px wide glyph
        draw_line(&mut img, (2, 55), (2, 99));
        draw_line(&mut img, (30, 0), (60, 0));
        draw_line(&mut img, (60, 0), (60, 40));
        let res = detect_shirorekha(&img, &StructuralConfig::default()).unwrap();
        assert_eq!(res.kind, ShirorekhaKind::Partial);
        assert!((res.span_ratio - 0.45).abs() < 1e-9);
    }

    #[test]
    fn ring_on_top_is_rejected() {
        let mut img = canvas();
        for (a, b) in [((5, 20), (5, 80)), ((5, 80), (40, 80)), ((40, 80), (40, 20)), ((40, 20), (5, 20))] {
            draw_line(&mut img, a, b);
        }
        let res = detect_shirorekha(&img, &StructuralConfig::default()).unwrap();
        assert_eq!(res.kind, ShirorekhaKind::None);
        assert!(res.trace.is_none());
    }

    #[test]
    fn slanted_stroke_is_not_a_headline() {
        let mut img = canvas();
        draw_line(&mut img, (0, 99), (60, 0));
        let res = detect_shirorekha(&img, &StructuralConfig::default()).unwrap();
        assert_eq!(res.kind, ShirorekhaKind::None);
        assert!(!res.straightness.unwrap().is_near_straight);
    }
}
