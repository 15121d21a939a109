//! Stage one: headline (shirorekha) and vertical bar (spine) detection.
//!
//! Both detectors follow a stroke and accept it only when its distances from a reference
//! edge change by bounded steps and drift within a bounded band (the straightness test in
//! [`straightness`]). The pair of detector outcomes is the glyph's [`StructuralClass`].

mod envelope;
mod group;
mod shirorekha;
mod spine;
mod trace;

pub use envelope::{bridge_gaps, right_envelope, straightness, upper_envelope, StraightnessReport, MAX_BRIDGED_GAP};
pub use group::{classify_group, ShirorekhaKind, SpineKind, StructuralClass};
pub use shirorekha::{detect_shirorekha, ShirorekhaResult};
pub use spine::{detect_spines, run_columns, vertical_runs, SpineResult, VerticalRun};
pub use trace::{trace_from_rightmost, Direction, Termination, Trace, PRIORITY_MASK};

use crate::error::{Error, Result};
use crate::raster::BinaryImage;

/// Thresholds for both detectors, in pixels at the 100×100 working scale.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralConfig {
    /// Largest allowed jump between successive envelope distances.
    pub step_tol: usize,
    /// Allowed total drift as a fraction of the run length (rounded up).
    pub drift_tol_frac: f64,
    /// Headline span ratio at or above which the headline counts as full.
    pub full_span: f64,
    /// Lowest span ratio still counted as a partial headline.
    pub partial_span: f64,
    /// Minimum spine run as a fraction of glyph height (rounded up).
    pub spine_height_frac: f64,
    /// Pixels right of the spine needed to call it a mid spine.
    pub mid_mass_tol: usize,
    /// Consecutive upward moves allowed while tracing the headline.
    pub max_consecutive_up: usize,
}

impl Default for StructuralConfig {
    fn default() -> Self {
        Self {
            step_tol: 2,
            drift_tol_frac: 0.10,
            full_span: 0.85,
            partial_span: 0.25,
            spine_height_frac: 0.75,
            mid_mass_tol: 5,
            max_consecutive_up: 2,
        }
    }
}

impl StructuralConfig {
    /// Drift tolerance for a run of `len` samples.
    pub fn drift_tol(&self, len: usize) -> usize {
        (self.drift_tol_frac * len as f64 - 1e-9).ceil().max(0.0) as usize
    }

    /// Shortest accepted spine for a glyph `height` pixels tall.
    pub fn min_spine_len(&self, height: usize) -> usize {
        (self.spine_height_frac * height as f64 - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.drift_tol_frac >= 0.0 && self.drift_tol_frac.is_finite()) {
            return bad("drift_tol_frac must be a non-negative number");
        }
        if !(0.0..=1.0).contains(&self.partial_span)
            || !(0.0..=1.0).contains(&self.full_span)
            || self.partial_span > self.full_span
        {
            return bad("span thresholds must satisfy 0 <= partial_span <= full_span <= 1");
        }
        if !(self.spine_height_frac > 0.0 && self.spine_height_frac <= 1.0) {
            return bad("spine_height_frac must be in (0, 1]");
        }
        Ok(())
    }
}

/// Both detector outcomes plus the resulting group.
#[derive(Debug, Clone)]
pub struct StructuralAnalysis {
    pub shirorekha: ShirorekhaResult,
    pub spine: SpineResult,
    pub class: StructuralClass,
}

/// Runs both detectors on a skeleton and assigns its group.
pub fn analyze(skel: &BinaryImage, cfg: &StructuralConfig) -> Result<StructuralAnalysis> {
    let shirorekha = detect_shirorekha(skel, cfg)?;
    let spine = detect_spines(skel, &shirorekha, cfg)?;
    let class = classify_group(&shirorekha, &spine)?;
    Ok(StructuralAnalysis {
        shirorekha,
        spine,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        let cfg = StructuralConfig::default();
        assert_eq!(cfg.drift_tol(95), 10);
        assert_eq!(cfg.drift_tol(10), 1);
        assert_eq!(cfg.min_spine_len(100), 75);
        assert_eq!(cfg.min_spine_len(99), 75);
        assert_eq!(cfg.min_spine_len(4), 3);
    }
}
