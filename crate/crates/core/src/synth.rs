//! Seeded synthetic glyphs with known structure.
//!
//! Each template is a table of vertices in unit coordinates plus strokes that index into
//! it. Jitter moves vertices, not strokes, so strokes that share a vertex stay joined. A
//! vertex placed on an earlier straight segment is anchored to it: it is interpolated from
//! the jittered segment ends instead of jittered itself, so a bar hanging from a headline
//! stays attached and the headline stays straight.
//! Templates are stylized stroke sets for the four structural groups most common in
//! handwritten data; they exercise the detectors and the zoning features rather than
//! imitate calligraphy.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
pub use crate::raster::draw_line;
use crate::raster::{pnm, thin_to_convergence, BinaryImage, NORMALIZED_SIZE};
use crate::structural::{ShirorekhaKind, SpineKind, StructuralClass};

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphTemplate {
    pub id: String,
    pub class_label: String,
    pub truth: StructuralClass,
    pub vertices: Vec<Vertex>,
    /// Polylines as vertex indices.
    pub strokes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vertex {
    /// `(x, y)` in `[0, 1]`, x to the right, y downward; jittered independently.
    Free(f64, f64),
    /// The point `t` of the way from vertex `from` to vertex `to`, both earlier in the table.
    On { from: usize, to: usize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterSpec {
    /// Maximum vertex displacement per axis, in pixels at 100×100.
    pub amplitude: f64,
    pub seed: u64,
}

impl JitterSpec {
    pub const NONE: JitterSpec = JitterSpec {
        amplitude: 0.0,
        seed: 0,
    };
}

/// Rasterizes a template at 100×100 with jittered vertices, then thins.
pub fn render(template: &GlyphTemplate, jitter: JitterSpec) -> BinaryImage {
    let scale = (NORMALIZED_SIZE - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(jitter.seed);
    let amp = jitter.amplitude.max(0.0);
    // positions in pixels as (row, col), before rounding
    let mut exact: Vec<(f64, f64)> = Vec::with_capacity(template.vertices.len());
    for v in &template.vertices {
        let p = match *v {
            Vertex::Free(x, y) => {
                let (dx, dy) = if amp > 0.0 {
                    (rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp))
                } else {
                    (0.0, 0.0)
                };
                (y * scale + dy, x * scale + dx)
            }
            Vertex::On { from, to, t } => {
                let (a, b) = (exact[from], exact[to]);
                (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
            }
        };
        exact.push(p);
    }
    let clamp = |v: f64| v.round().clamp(0.0, scale) as isize;
    let points: Vec<(isize, isize)> = exact.iter().map(|&(r, c)| (clamp(r), clamp(c))).collect();
    let mut img = BinaryImage::new(NORMALIZED_SIZE, NORMALIZED_SIZE);
    for stroke in &template.strokes {
        for pair in stroke.windows(2) {
            draw_line(&mut img, points[pair[0]], points[pair[1]]);
        }
        if let [only] = stroke[..] {
            draw_line(&mut img, points[only], points[only]);
        }
    }
    thin_to_convergence(&img)
}

struct Builder {
    id: &'static str,
    truth: StructuralClass,
    /// Unjittered positions in 0..=99 pixel coordinates, parallel to `vertices`.
    positions: Vec<(f64, f64)>,
    vertices: Vec<Vertex>,
    strokes: Vec<Vec<usize>>,
}

impl Builder {
    fn new(id: &'static str, shiro: ShirorekhaKind, spine: SpineKind) -> Self {
        Self {
            id,
            truth: StructuralClass::new(shiro, spine).expect("template group is reachable"),
            positions: Vec::new(),
            vertices: Vec::new(),
            strokes: Vec::new(),
        }
    }

    /// Adds (or reuses) a vertex given in 0..=99 pixel coordinates. A point strictly
    /// inside a segment of an earlier stroke is anchored to that segment.
    fn v(&mut self, x: f64, y: f64) -> usize {
        if let Some(i) = self.positions.iter().position(|&q| q == (x, y)) {
            return i;
        }
        let anchor = self.strokes.iter().flat_map(|s| s.windows(2)).find_map(|seg| {
            let (a, b) = (self.positions[seg[0]], self.positions[seg[1]]);
            let cross = (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
            let len2 = (b.0 - a.0).powi(2) + (b.1 - a.1).powi(2);
            let t = ((x - a.0) * (b.0 - a.0) + (y - a.1) * (b.1 - a.1)) / len2;
            (cross.abs() < 1e-9 && t > 0.0 && t < 1.0).then_some(Vertex::On {
                from: seg[0],
                to: seg[1],
                t,
            })
        });
        self.positions.push((x, y));
        self.vertices
            .push(anchor.unwrap_or(Vertex::Free(x / 99.0, y / 99.0)));
        self.vertices.len() - 1
    }

    fn stroke(mut self, pts: &[(f64, f64)]) -> Self {
        let idx = pts.iter().map(|&(x, y)| self.v(x, y)).collect();
        self.strokes.push(idx);
        self
    }

    fn build(self) -> GlyphTemplate {
        GlyphTemplate {
            id: self.id.to_string(),
            class_label: self.id.to_string(),
            truth: self.truth,
            vertices: self.vertices,
            strokes: self.strokes,
        }
    }
}

const HL: f64 = 6.0;

/// The shipped template set: 13 templates over four groups.
pub fn builtin_templates() -> Vec<GlyphTemplate> {
    use ShirorekhaKind::{Full, Partial};
    use SpineKind::{EndSpine, MidSpine, NoSpine};

    // headline first, then the spine, so later strokes can anchor onto both
    vec![
        // full headline, end spine
        Builder::new("cha", Full, EndSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(30.0, HL), (30.0, 50.0), (84.0, 50.0)])
            .build(),
        Builder::new("kha", Full, EndSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(20.0, 35.0), (50.0, 35.0), (50.0, 65.0), (20.0, 65.0), (20.0, 35.0)])
            .stroke(&[(50.0, 50.0), (84.0, 50.0)])
            .build(),
        Builder::new("sha", Full, EndSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(50.0, HL), (50.0, 25.0)])
            .stroke(&[(12.0, 30.0), (50.0, 70.0), (84.0, 70.0)])
            .build(),
        // full headline, mid spine
        Builder::new("ka", Full, MidSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(55.0, HL), (55.0, 94.0)])
            .stroke(&[(55.0, 35.0), (80.0, 35.0), (80.0, 60.0), (55.0, 60.0)])
            .stroke(&[(25.0, 70.0), (25.0, 45.0), (55.0, 45.0)])
            .build(),
        Builder::new("pha", Full, MidSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(55.0, HL), (55.0, 94.0)])
            .stroke(&[(55.0, 30.0), (82.0, 30.0), (82.0, 55.0)])
            .stroke(&[(20.0, 35.0), (40.0, 35.0), (40.0, 60.0), (20.0, 60.0), (20.0, 35.0)])
            .stroke(&[(40.0, 48.0), (55.0, 48.0)])
            .build(),
        Builder::new("ra", Full, MidSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(55.0, HL), (55.0, 94.0)])
            .stroke(&[(55.0, 50.0), (82.0, 80.0)])
            .stroke(&[(28.0, HL), (28.0, 55.0)])
            .build(),
        // full headline, no spine
        Builder::new("ta", Full, NoSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(50.0, HL), (50.0, 35.0), (28.0, 60.0), (45.0, 88.0), (72.0, 92.0)])
            .build(),
        Builder::new("tha", Full, NoSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[
                (50.0, 36.0),
                (68.0, 44.0),
                (74.0, 64.0),
                (68.0, 84.0),
                (50.0, 92.0),
                (32.0, 84.0),
                (26.0, 64.0),
                (32.0, 44.0),
                (50.0, 36.0),
            ])
            .stroke(&[(50.0, HL), (50.0, 36.0)])
            .build(),
        Builder::new("ba", Full, NoSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(20.0, HL), (20.0, 60.0), (80.0, 60.0), (80.0, HL)])
            .stroke(&[(35.0, 60.0), (35.0, 94.0)])
            .build(),
        Builder::new("ha", Full, NoSpine)
            .stroke(&[(4.0, HL), (95.0, HL)])
            .stroke(&[(40.0, HL), (40.0, 30.0), (65.0, 45.0), (40.0, 62.0), (65.0, 90.0)])
            .build(),
        // partial headline, end spine
        Builder::new("dha", Partial, EndSpine)
            .stroke(&[(50.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(4.0, 30.0), (4.0, 50.0), (84.0, 50.0)])
            .build(),
        Builder::new("thha", Partial, EndSpine)
            .stroke(&[(50.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(8.0, 30.0), (40.0, 30.0), (40.0, 60.0), (8.0, 60.0), (8.0, 30.0)])
            .stroke(&[(40.0, 45.0), (84.0, 45.0)])
            .build(),
        Builder::new("bha", Partial, EndSpine)
            .stroke(&[(50.0, HL), (95.0, HL)])
            .stroke(&[(84.0, HL), (84.0, 94.0)])
            .stroke(&[(6.0, 25.0), (40.0, 60.0), (84.0, 60.0)])
            .stroke(&[(40.0, 60.0), (40.0, 85.0)])
            .build(),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Indices whose last decimal digit is below 7 train; the rest test (70/30).
    pub fn of_index(index: usize) -> Split {
        if index % 10 < 7 {
            Split::Train
        } else {
            Split::Test
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::MalformedManifest(format!("bad split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub template_id: String,
    pub class_label: String,
    pub group: StructuralClass,
    pub index: usize,
    pub split: Split,
    pub seed: u64,
    pub image: BinaryImage,
}

impl SyntheticSample {
    /// Path relative to the corpus root.
    pub fn relative_path(&self) -> String {
        format!("{}/{}/{}.pbm", self.group.slug(), self.class_label, self.index)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample seed, a function of the base seed, template id and index only.
pub fn sample_seed(base: u64, template_id: &str, index: usize) -> u64 {
    // FNV-1a over the id
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in template_id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(base ^ h).wrapping_add(index as u64))
}

/// `per_class` jittered renderings of every template.
pub fn generate_corpus(
    templates: &[GlyphTemplate],
    per_class: usize,
    amplitude: f64,
    seed: u64,
) -> Vec<SyntheticSample> {
    use rayon::prelude::*;

    let jobs: Vec<(&GlyphTemplate, usize)> = templates
        .iter()
        .flat_map(|t| (0..per_class).map(move |i| (t, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(t, index)| {
            let s = sample_seed(seed, &t.id, index);
            SyntheticSample {
                template_id: t.id.clone(),
                class_label: t.class_label.clone(),
                group: t.truth,
                index,
                split: Split::of_index(index),
                seed: s,
                image: render(
                    t,
                    JitterSpec {
                        amplitude,
                        seed: s,
                    },
                ),
            }
        })
        .collect()
}

pub const MANIFEST_NAME: &str = "manifest.csv";

/// Writes `<root>/<group>/<class_label>/<index>.pbm` for every sample plus
/// `manifest.csv` (`path,class_label,group,split`).
pub fn write_corpus(root: &Path, samples: &[SyntheticSample]) -> Result<()> {
    let mut manifest = String::from("path,class_label,group,split\n");
    for s in samples {
        let rel = s.relative_path();
        let path = root.join(&rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        pnm::save_pbm(&path, &s.image)?;
        manifest.push_str(&format!(
            "{rel},{},{},{}\n",
            s.class_label,
            s.group.slug(),
            s.split.as_str()
        ));
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    write_atomic(&root.join(MANIFEST_NAME), manifest.as_bytes())
}
