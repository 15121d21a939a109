//! Zoning features: intersection points and open ends counted per 25×25 tile.
//!
//! Points are classified with neighbor counts taken on the whole image, so a stroke that
//! crosses a tile boundary contributes no ends there. The vector lists tiles row-major,
//! each as an adjacent `(intersections, open_ends)` pair.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::raster::{BinaryImage, NORMALIZED_SIZE};

pub const TILE_SIZE: usize = 25;
pub const TILES_PER_SIDE: usize = NORMALIZED_SIZE / TILE_SIZE;
pub const TILE_COUNT: usize = TILES_PER_SIDE * TILES_PER_SIDE;
pub const FEATURE_LEN: usize = 2 * TILE_COUNT;

/// Counts at or above this value scale to 1.0.
pub const FEATURE_CAP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Intersection,
    OpenEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeaturePoint {
    pub row: usize,
    pub col: usize,
    pub kind: PointKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector([u32; FEATURE_LEN]);

impl FeatureVector {
    pub fn values(&self) -> &[u32; FEATURE_LEN] {
        &self.0
    }

    pub fn intersections(&self, tile: usize) -> u32 {
        self.0[2 * tile]
    }

    pub fn open_ends(&self, tile: usize) -> u32 {
        self.0[2 * tile + 1]
    }

    /// Counts divided by [`FEATURE_CAP`] and clamped to `[0, 1]`.
    pub fn scaled(&self) -> [f64; FEATURE_LEN] {
        scale_features(self)
    }
}

/// Tile index of a pixel on the 100×100 grid.
pub fn tile_of(row: usize, col: usize) -> Result<usize> {
    if row >= NORMALIZED_SIZE || col >= NORMALIZED_SIZE {
        return Err(Error::OutOfBounds {
            row,
            col,
            width: NORMALIZED_SIZE,
            height: NORMALIZED_SIZE,
        });
    }
    Ok((row / TILE_SIZE) * TILES_PER_SIDE + col / TILE_SIZE)
}

/// Open ends (exactly one neighbor) and intersections (three or more), row-major.
pub fn find_feature_points(skel: &BinaryImage) -> Vec<FeaturePoint> {
    skel.foreground()
        .filter_map(|(row, col)| {
            let kind = match skel.neighbors(row, col) {
                1 => PointKind::OpenEnd,
                n if n >= 3 => PointKind::Intersection,
                _ => return None,
            };
            Some(FeaturePoint { row, col, kind })
        })
        .collect()
}

pub fn extract_features(skel: &BinaryImage) -> Result<FeatureVector> {
    if skel.width() != NORMALIZED_SIZE || skel.height() != NORMALIZED_SIZE {
        return Err(Error::WrongDimensions {
            expected: NORMALIZED_SIZE,
            width: skel.width(),
            height: skel.height(),
        });
    }
    let mut v = [0u32; FEATURE_LEN];
    for p in find_feature_points(skel) {
        let tile = tile_of(p.row, p.col)?;
        let slot = match p.kind {
            PointKind::Intersection => 2 * tile,
            PointKind::OpenEnd => 2 * tile + 1,
        };
        v[slot] += 1;
    }
    Ok(FeatureVector(v))
}

pub fn scale_features(v: &FeatureVector) -> [f64; FEATURE_LEN] {
    v.0.map(|x| (x as f64 / FEATURE_CAP).clamp(0.0, 1.0))
}

/// One row of the feature CSV export.
#[derive(Debug, Clone)]
pub struct FeatureRow {
    pub label: String,
    pub group: String,
    pub features: FeatureVector,
}

/// Writes `label,group,f0,...,f31` with a header row.
pub fn write_feature_csv<W: Write>(mut out: W, rows: &[FeatureRow]) -> std::io::Result<()> {
    let header: Vec<String> = (0..FEATURE_LEN).map(|i| format!("f{i}")).collect();
    writeln!(out, "label,group,{}", header.join(","))?;
    for row in rows {
        let values: Vec<String> = row.features.0.iter().map(u32::to_string).collect();
        writeln!(out, "{},{},{}", row.label, row.group, values.join(","))?;
    }
    Ok(())
}

/// [`write_feature_csv`] into a file, replaced atomically.
pub fn save_feature_csv(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, rows).map_err(|e| Error::io(path, e))?;
    write_atomic(path, &buf)
}
