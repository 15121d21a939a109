//! Binary rasters and the glyph preprocessing chain.
//!
//! Pixels are stored row-major as `bool`, `true` meaning foreground (ink). Every operation
//! here is a pure function that returns a new image.

mod morph;
mod normalize;
pub mod pnm;

use std::fmt;

use crate::error::{Error, Result};

pub use morph::{thicken, thin_to_convergence, prune, DEFAULT_MAX_SPUR};
pub use normalize::{is_normalized_skeleton, normalize, scale_to, Skeleton, NORMALIZED_SIZE};

/// Offsets of the 8-neighborhood, clockwise from north.
pub const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Bresenham line between `(row, col)` endpoints; pixels off the image are skipped.
pub fn draw_line(img: &mut BinaryImage, from: (isize, isize), to: (isize, isize)) {
    let (mut r, mut c) = from;
    let dr = (to.0 - r).abs();
    let dc = -(to.1 - c).abs();
    let sr = if r < to.0 { 1 } else { -1 };
    let sc = if c < to.1 { 1 } else { -1 };
    let mut err = dr + dc;
    loop {
        if r >= 0 && c >= 0 && (r as usize) < img.height() && (c as usize) < img.width() {
            img.set(r as usize, c as usize, true);
        }
        if (r, c) == to {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dc {
            err += dc;
            r += sr;
        }
        if e2 <= dr {
            err += dr;
            c += sc;
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub row_min: usize,
    pub row_max: usize,
    pub col_min: usize,
    pub col_max: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.col_max - self.col_min + 1
    }

    pub fn height(&self) -> usize {
        self.row_max - self.row_min + 1
    }
}

impl BinaryImage {
    /// All-background image. Panics on a zero dimension.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::MalformedHeader(format!(
                "zero dimension {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds an image from text rows: `#`, `1`, `X` or `*` are foreground, anything else
    /// background. All rows must have the same length.
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut img = Self::new(width, height);
        for (r, line) in rows.iter().enumerate() {
            assert_eq!(line.chars().count(), width, "ragged row {r}");
            for (c, ch) in line.chars().enumerate() {
                img.set(r, c, matches!(ch, '#' | '1' | 'X' | '*'));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.pixels[row * self.width + col] = value;
    }

    /// Signed lookup; anything off the image is background.
    #[inline]
    pub fn at(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.pixels[row as usize * self.width + col as usize]
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.pixels.iter().any(|&p| p)
    }

    /// Foreground coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p)
            .map(move |(i, _)| (i / w, i % w))
    }

    /// Unchecked 8-neighbor count (off-image counts as background).
    #[inline]
    pub(crate) fn neighbors(&self, row: usize, col: usize) -> u8 {
        let (r, c) = (row as isize, col as isize);
        NEIGHBORS_8
            .iter()
            .filter(|(dr, dc)| self.at(r + dr, c + dc))
            .count() as u8
    }

    /// Number of foreground pixels among the 8 neighbors of `(row, col)`.
    pub fn neighbor_count(&self, row: usize, col: usize) -> Result<u8> {
        self.check_bounds(row, col)?;
        Ok(self.neighbors(row, col))
    }

    pub(crate) fn check_bounds(&self, row: usize, col: usize) -> Result<()> {
        if row >= self.height || col >= self.width {
            return Err(Error::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// Tight rectangle around the foreground.
    pub fn bounding_box(&self) -> Result<BoundingBox> {
        let mut bb: Option<BoundingBox> = None;
        for (r, c) in self.foreground() {
            let b = bb.get_or_insert(BoundingBox {
                row_min: r,
                row_max: r,
                col_min: c,
                col_max: c,
            });
            b.row_min = b.row_min.min(r);
            b.row_max = b.row_max.max(r);
            b.col_min = b.col_min.min(c);
            b.col_max = b.col_max.max(c);
        }
        bb.ok_or(Error::EmptyImage)
    }

    pub fn crop(&self, bbox: &BoundingBox) -> Result<BinaryImage> {
        if bbox.row_min > bbox.row_max
            || bbox.col_min > bbox.col_max
            || bbox.row_max >= self.height
            || bbox.col_max >= self.width
        {
            return Err(Error::BoxOutOfRange {
                row_min: bbox.row_min,
                row_max: bbox.row_max,
                col_min: bbox.col_min,
                col_max: bbox.col_max,
                width: self.width,
                height: self.height,
            });
        }
        let mut out = BinaryImage::new(bbox.width(), bbox.height());
        for r in 0..bbox.height() {
            let src = (bbox.row_min + r) * self.width + bbox.col_min;
            out.pixels[r * out.width..(r + 1) * out.width]
                .copy_from_slice(&self.pixels[src..src + bbox.width()]);
        }
        Ok(out)
    }

    /// Surrounds the image with `margin` background pixels on every side.
    pub fn pad(&self, margin: usize) -> BinaryImage {
        let mut out = BinaryImage::new(self.width + 2 * margin, self.height + 2 * margin);
        for (r, c) in self.foreground() {
            out.set(r + margin, c + margin, true);
        }
        out
    }

    /// Pixelwise union; both images must share dimensions.
    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| a || b)
            .collect();
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Number of pixels at which the two images differ.
    pub fn hamming(&self, other: &BinaryImage) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryImage {}x{}", self.width, self.height)?;
        for r in 0..self.height {
            let line: String = (0..self.width)
                .map(|c| if self.get(r, c) { '#' } else { '.' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
