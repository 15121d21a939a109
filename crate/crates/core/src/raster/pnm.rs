//! Netpbm input and output.
//!
//! Reads PBM (`P1` plain, `P4` raw) directly, and PGM (`P2` plain, `P5` raw) through a
//! global threshold at half the declared maximum: samples darker than that are ink.
//! Writes plain `P1` PBM with foreground stored as `1`.

use std::fs;
use std::path::Path;

use super::BinaryImage;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Magic {
    PlainPbm,
    RawPbm,
    PlainPgm,
    RawPgm,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn header_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("missing {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("unparsable {what}")))
    }
}

/// Decodes any supported Netpbm variant into a binary image.
pub fn decode(data: &[u8]) -> Result<BinaryImage> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::MalformedHeader("missing magic number".into()));
    }
    let magic = match data[1] {
        b'1' => Magic::PlainPbm,
        b'4' => Magic::RawPbm,
        b'2' => Magic::PlainPgm,
        b'5' => Magic::RawPgm,
        other => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic P{}",
                other as char
            )))
        }
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.header_uint("width")?;
    let height = cur.header_uint("height")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    let maxval = match magic {
        Magic::PlainPgm | Magic::RawPgm => {
            let m = cur.header_uint("maxval")?;
            if m == 0 || m > 65535 {
                return Err(Error::MalformedHeader(format!("maxval {m} out of range")));
            }
            m
        }
        _ => 1,
    };
    let expected = width * height;
    let pixels = match magic {
        Magic::PlainPbm => plain_pbm_pixels(&mut cur)?,
        Magic::PlainPgm => plain_pgm_pixels(&mut cur, maxval)?,
        Magic::RawPbm => {
            let raster = raw_raster(&mut cur)?;
            raw_pbm_pixels(raster, width, height)?
        }
        Magic::RawPgm => {
            let raster = raw_raster(&mut cur)?;
            raw_pgm_pixels(raster, expected, maxval)?
        }
    };
    if pixels.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: pixels.len(),
        });
    }
    BinaryImage::from_pixels(width, height, pixels)
}

fn plain_pbm_pixels(cur: &mut Cursor<'_>) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    loop {
        cur.skip_space_and_comments();
        let Some(&b) = cur.data.get(cur.pos) else {
            break;
        };
        match b {
            b'0' => out.push(false),
            b'1' => out.push(true),
            other => {
                return Err(Error::MalformedHeader(format!(
                    "invalid PBM sample {:?}",
                    other as char
                )))
            }
        }
        cur.pos += 1;
    }
    Ok(out)
}

fn is_ink(value: usize, maxval: usize) -> bool {
    2 * value < maxval
}

fn plain_pgm_pixels(cur: &mut Cursor<'_>, maxval: usize) -> Result<Vec<bool>> {
    let mut out = Vec::new();
    loop {
        cur.skip_space_and_comments();
        if cur.pos >= cur.data.len() {
            break;
        }
        let v = cur.header_uint("sample")?;
        if v > maxval {
            return Err(Error::MalformedHeader(format!(
                "sample {v} exceeds maxval {maxval}"
            )));
        }
        out.push(is_ink(v, maxval));
    }
    Ok(out)
}

fn raw_raster<'a>(cur: &mut Cursor<'a>) -> Result<&'a [u8]> {
    // exactly one whitespace byte separates the header from binary data
    match cur.data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => Ok(&cur.data[cur.pos + 1..]),
        _ => Err(Error::MalformedHeader("missing raster separator".into())),
    }
}

fn raw_pbm_pixels(raster: &[u8], width: usize, height: usize) -> Result<Vec<bool>> {
    let row_bytes = width.div_ceil(8);
    if raster.len() != row_bytes * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            found: raster.len() / row_bytes * width,
        });
    }
    let mut out = Vec::with_capacity(width * height);
    for row in raster.chunks(row_bytes) {
        for c in 0..width {
            out.push(row[c / 8] & (0x80 >> (c % 8)) != 0);
        }
    }
    Ok(out)
}

fn raw_pgm_pixels(raster: &[u8], expected: usize, maxval: usize) -> Result<Vec<bool>> {
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    if raster.len() != expected * sample_bytes {
        return Err(Error::DimensionMismatch {
            expected,
            found: raster.len() / sample_bytes,
        });
    }
    Ok(raster
        .chunks(sample_bytes)
        .map(|s| {
            let v = if sample_bytes == 2 {
                (s[0] as usize) << 8 | s[1] as usize
            } else {
                s[0] as usize
            };
            is_ink(v, maxval)
        })
        .collect())
}

/// Reads a PBM file (PGM is accepted too and thresholded).
pub fn load_pbm(path: &Path) -> Result<BinaryImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&data)
}

/// Plain PBM encoding; raster lines are wrapped at 70 samples.
pub fn encode_pbm(img: &BinaryImage) -> String {
    let mut out = format!("P1\n{} {}\n", img.width(), img.height());
    for r in 0..img.height() {
        let row: Vec<u8> = (0..img.width())
            .map(|c| if img.get(r, c) { b'1' } else { b'0' })
            .collect();
        for chunk in row.chunks(70) {
            out.push_str(std::str::from_utf8(chunk).expect("ascii"));
            out.push('\n');
        }
    }
    out
}

pub fn save_pbm(path: &Path, img: &BinaryImage) -> Result<()> {
    write_atomic(path, encode_pbm(img).as_bytes())
}
