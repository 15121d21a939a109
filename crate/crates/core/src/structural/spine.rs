use std::collections::BTreeMap;

use log::warn;

use super::{ShirorekhaKind, ShirorekhaResult, SpineKind, StructuralConfig};
use crate::error::Result;
use crate::raster::BinaryImage;

/// Candidate runs whose median columns are this close are treated as one bar.
const MERGE_DISTANCE: usize = 3;

/// A near-vertical stroke: one pixel per row, rows strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalRun {
    pub points: Vec<(usize, usize)>,
}

impl VerticalRun {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Median column of the run.
    pub fn column(&self) -> usize {
        let mut cols: Vec<usize> = self.points.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        cols[cols.len() / 2]
    }

    fn col_at(&self, row: usize) -> Option<usize> {
        let first = self.points.first()?.0;
        let idx = row.checked_sub(first)?;
        self.points.get(idx).map(|p| p.1)
    }
}

#[derive(Debug, Clone)]
pub struct SpineResult {
    pub kind: SpineKind,
    pub spine_col: Option<usize>,
    pub matra_col: Option<usize>,
    pub spine_run: Option<VerticalRun>,
    pub matra_run: Option<VerticalRun>,
    /// More than two bars qualified; only the two rightmost were kept.
    pub too_many_spines: bool,
}

impl SpineResult {
    fn none() -> Self {
        Self {
            kind: SpineKind::NoSpine,
            spine_col: None,
            matra_col: None,
            spine_run: None,
            matra_run: None,
            too_many_spines: false,
        }
    }
}

/// Upper bound on pixels visited per start when searching for a straight descent.
const SEARCH_BUDGET: usize = 20_000;

struct Descent<'a> {
    img: &'a BinaryImage,
    cfg: &'a StructuralConfig,
    origin: usize,
    bottom: usize,
    path: Vec<(usize, usize)>,
    best: Vec<(usize, usize)>,
    budget: usize,
}

impl Descent<'_> {
    /// Depth-first over every one-row-per-step downward path, recording the longest prefix
    /// that passes the straightness test. Distances are measured from the right edge.
    fn visit(&mut self, lo: usize, hi: usize) {
        let &(r, c) = self.path.last().expect("path starts non-empty");
        let len = self.path.len();
        if hi - lo <= self.cfg.drift_tol(len) && len > self.best.len() {
            self.best = self.path.clone();
        }
        // even reaching the bottom could not bring the drift back into tolerance
        if hi - lo > self.cfg.drift_tol(len + self.bottom - r) || self.budget == 0 {
            return;
        }
        self.budget -= 1;
        let (r, c) = (r as isize, c as isize);
        // straight down first, then the diagonal nearer the starting column
        let mut steps = [c, c - 1, c + 1];
        steps[1..].sort_by_key(|&nc| (nc - self.origin as isize).abs());
        for nc in steps {
            if self.img.at(r + 1, nc) {
                let d = self.img.width() - 1 - nc as usize;
                self.path.push((r as usize + 1, nc as usize));
                self.visit(lo.min(d), hi.max(d));
                self.path.pop();
            }
        }
    }
}

/// Longest near-straight downward path from `start`, one pixel per row.
fn straight_descent(
    img: &BinaryImage,
    start: (usize, usize),
    bottom: usize,
    cfg: &StructuralConfig,
) -> Vec<(usize, usize)> {
    let d = img.width() - 1 - start.1;
    let mut search = Descent {
        img,
        cfg,
        origin: start.1,
        bottom,
        path: vec![start],
        best: Vec::new(),
        budget: SEARCH_BUDGET,
    };
    search.visit(d, d);
    search.best
}

/// Every distinct near-vertical run at least `min_len` rows long, rightmost first.
pub fn vertical_runs(img: &BinaryImage, cfg: &StructuralConfig) -> Result<Vec<VerticalRun>> {
    let bbox = img.bounding_box()?;
    let min_len = cfg.min_spine_len(bbox.height());
    let last_start = bbox.row_min + bbox.height().saturating_sub(min_len);

    let mut candidates: Vec<VerticalRun> = Vec::new();
    for (r, c) in img.foreground() {
        if r > last_start {
            break;
        }
        let points = straight_descent(img, (r, c), bbox.row_max, cfg);
        if points.len() >= min_len {
            candidates.push(VerticalRun { points });
        }
    }

    // cluster by median column, keeping the longest run of each cluster
    candidates.sort_by(|a, b| b.column().cmp(&a.column()).then(b.len().cmp(&a.len())));
    let mut runs: Vec<VerticalRun> = Vec::new();
    let mut anchor: Option<usize> = None;
    for cand in candidates {
        let col = cand.column();
        match (anchor, runs.last_mut()) {
            (Some(a), Some(last)) if a - col <= MERGE_DISTANCE => {
                if cand.len() > last.len() {
                    *last = cand;
                }
            }
            _ => {
                anchor = Some(col);
                runs.push(cand);
            }
        }
    }
    Ok(runs)
}

/// Finds the spine, and a matra bar to its right if one exists.
///
/// Runs must be near straight and span at least `spine_height_frac` of the glyph height.
/// No headline means no spine. With two runs the rightmost is the matra. A spine is an
/// end spine unless at least `mid_mass_tol` pixels lie to its right outside the headline
/// band and the matra.
pub fn detect_spines(
    skel: &BinaryImage,
    shirorekha: &ShirorekhaResult,
    cfg: &StructuralConfig,
) -> Result<SpineResult> {
    let bbox = skel.bounding_box()?;
    if shirorekha.kind == ShirorekhaKind::None {
        return Ok(SpineResult::none());
    }
    let mut runs = vertical_runs(skel, cfg)?;
    let too_many = runs.len() > 2;
    if too_many {
        warn!(
            "{} vertical bars qualified as spines; keeping the two rightmost",
            runs.len()
        );
        runs.truncate(2);
    }
    let (spine, matra) = match runs.len() {
        0 => return Ok(SpineResult::none()),
        1 => (runs.remove(0), None),
        _ => {
            let matra = runs.remove(0);
            (runs.remove(0), Some(matra))
        }
    };

    let band = shirorekha.rows_by_col();
    let spine_col = spine.column();
    let right_mass = skel
        .foreground()
        .filter(|&(r, c)| {
            if band.get(&c).is_some_and(|&top| r.abs_diff(top) <= cfg.step_tol) {
                return false;
            }
            if c <= spine.col_at(r).unwrap_or(spine_col) + 1 {
                return false;
            }
            if let Some(m) = &matra {
                if c.abs_diff(m.col_at(r).unwrap_or(m.column())) <= 1 {
                    return false;
                }
            }
            r >= bbox.row_min
        })
        .count();
    let kind = if right_mass >= cfg.mid_mass_tol {
        SpineKind::MidSpine
    } else {
        SpineKind::EndSpine
    };
    Ok(SpineResult {
        kind,
        spine_col: Some(spine_col),
        matra_col: matra.as_ref().map(VerticalRun::column),
        spine_run: Some(spine),
        matra_run: matra,
        too_many_spines: too_many,
    })
}

/// Per-row columns of a run, for callers that mask it out.
pub fn run_columns(run: &VerticalRun) -> BTreeMap<usize, usize> {
    run.points.iter().copied().collect()
}
