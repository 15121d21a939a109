//! Two-stage recognizer for handwritten Devanagari characters.
//!
//! Stage one reduces a glyph to a one-pixel-wide 100×100 skeleton and routes it to a
//! structural group from two detectors: the headline (shirorekha), traced right to left
//! with a priority mask, and the vertical bar (spine), both accepted only when a
//! successive-difference straightness test passes. Stage two counts intersection points
//! and open ends in a 4×4 grid of 25×25 tiles and feeds the 32 counts to a small
//! feedforward network trained for that group.
//!
//! Modules, bottom-up:
//!
//! - [`raster`]: binary images, PBM/PGM I/O, thicken/thin/prune, 100×100 normalization.
//! - [`structural`]: priority-mask trace, envelopes, straightness, shirorekha and spine
//!   detection, group assignment.
//! - [`features`]: tile assignment and the 32-count feature vector.
//! - [`nn`]: 32-H-K sigmoid/softmax network, backprop, SCG and momentum trainers,
//!   text model format.
//! - [`synth`]: seeded stroke-template glyph generator and corpus writer.
//! - [`pipeline`]: preprocessing chain, recognition, per-group training, evaluation.
//! - [`config`]: flat `key = value` configuration shared by the CLI.

pub mod config;
pub mod error;
pub mod features;
pub mod nn;
pub mod pipeline;
pub mod raster;
pub mod structural;
pub mod synth;

pub mod fsutil;

pub use error::{Error, Result};
