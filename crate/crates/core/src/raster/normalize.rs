use std::ops::Deref;

use super::{draw_line, thin_to_convergence, BinaryImage};
use crate::error::{Error, Result};

/// Side length of the normalized glyph raster.
pub const NORMALIZED_SIZE: usize = 100;

/// A normalized, one-pixel-wide glyph raster.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Skeleton(BinaryImage);

impl Skeleton {
    /// Wraps an image that is already 100×100 and one pixel wide.
    pub fn from_image(img: BinaryImage) -> Result<Self> {
        if img.width() != NORMALIZED_SIZE || img.height() != NORMALIZED_SIZE {
            return Err(Error::WrongDimensions {
                expected: NORMALIZED_SIZE,
                width: img.width(),
                height: img.height(),
            });
        }
        Ok(Skeleton(img))
    }

    pub fn image(&self) -> &BinaryImage {
        &self.0
    }

    pub fn into_image(self) -> BinaryImage {
        self.0
    }
}

impl Deref for Skeleton {
    type Target = BinaryImage;

    fn deref(&self) -> &BinaryImage {
        &self.0
    }
}

impl AsRef<BinaryImage> for Skeleton {
    fn as_ref(&self) -> &BinaryImage {
        &self.0
    }
}

/// Forward map of one axis: the first and last source index land on the first and last
/// destination index, so a tight glyph stays tight. A single index maps to the middle.
fn axis_map(src: usize, dst: usize) -> impl Fn(usize) -> isize {
    move |i| {
        if src == 1 {
            ((dst - 1) / 2) as isize
        } else {
            (i as f64 * (dst - 1) as f64 / (src - 1) as f64).round() as isize
        }
    }
}

/// Joins two mapped pixels: diagonal steps first from the upper end, then straight steps.
/// A slope thus resolves as high as possible, which keeps a stroke that dips at a
/// junction passable for the leftward headline trace.
fn join(img: &mut BinaryImage, a: (isize, isize), b: (isize, isize)) {
    let (a, b) = if (a.0, a.1) <= (b.0, b.1) { (a, b) } else { (b, a) };
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let diag = dr.abs().min(dc.abs());
    let (mut r, mut c) = a;
    draw_line(img, a, a);
    for i in 0..dr.abs().max(dc.abs()) {
        if i < diag {
            r += dr.signum();
            c += dc.signum();
        } else if dr.abs() > dc.abs() {
            r += dr.signum();
        } else {
            c += dc.signum();
        }
        draw_line(img, (r, c), (r, c));
    }
}

/// Scales a stroke image to `width`×`height`.
///
/// Pixel coordinates are mapped forward and every pair of 8-adjacent foreground pixels is
/// joined by a short path between their images. Strokes therefore stay connected
/// and one pixel wide in either direction of scaling, and a diagonal step never turns
/// into the duplicated-row jog that resampling the inverse map produces.
pub fn scale_to(img: &BinaryImage, width: usize, height: usize) -> BinaryImage {
    let mr = axis_map(img.height(), height);
    let mc = axis_map(img.width(), width);
    let mut out = BinaryImage::new(width, height);
    for (r, c) in img.foreground() {
        let p = (mr(r), mc(c));
        draw_line(&mut out, p, p);
        // each adjacent pair once: east, south-west, south, south-east
        for (dr, dc) in [(0, 1), (1, -1), (1, 0), (1, 1)] {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            if img.at(nr, nc) {
                join(&mut out, p, (mr(nr as usize), mc(nc as usize)));
            }
        }
    }
    out
}

/// Rescaling rounds allowed for re-thinning to stop pulling the glyph off an edge.
const RESCALE_ROUNDS: usize = 3;

/// Thins, crops to the skeleton, rescales to 100×100 and re-thins.
///
/// Re-thinning can delete a corner pixel on the frame; the result is then cropped and
/// rescaled again, a few rounds at most.
pub fn normalize(img: &BinaryImage) -> Result<Skeleton> {
    let mut current = thin_to_convergence(&img.crop(&img.bounding_box()?)?);
    for _ in 0..RESCALE_ROUNDS {
        let cropped = current.crop(&current.bounding_box()?)?;
        current = thin_to_convergence(&scale_to(&cropped, NORMALIZED_SIZE, NORMALIZED_SIZE));
        if is_normalized_skeleton(&current) {
            break;
        }
    }
    Skeleton::from_image(current)
}

/// True for a 100×100 one-pixel-wide raster whose glyph touches all four edges, i.e. one
/// that [`normalize`] would leave as it is. A glyph one pixel thick along an axis sits on
/// the middle line of that axis instead.
pub fn is_normalized_skeleton(img: &BinaryImage) -> bool {
    let fills = |lo: usize, hi: usize| (lo, hi) == (0, NORMALIZED_SIZE - 1) || lo == hi && lo == (NORMALIZED_SIZE - 1) / 2;
    img.width() == NORMALIZED_SIZE
        && img.height() == NORMALIZED_SIZE
        && img
            .bounding_box()
            .is_ok_and(|b| fills(b.row_min, b.row_max) && fills(b.col_min, b.col_max))
        && thin_to_convergence(img) == *img
}
