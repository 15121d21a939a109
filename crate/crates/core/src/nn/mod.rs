//! Single-hidden-layer feedforward network and its trainers.
//!
//! The network maps `n_in` inputs through a logistic hidden layer to a softmax output and
//! is trained full-batch on mean cross-entropy. Parameters are exposed as one flat vector
//! in the order `W1, b1, W2, b2` (weights row-major, one row per output unit), which is
//! also the order of the model file.

mod mlp;
mod model_file;
mod scg;
mod train;

pub use mlp::{Mlp, Sample};
pub use model_file::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use scg::{scg_minimize, MinimizeOutcome};
pub use train::{train, train_momentum, train_scg, StopReason, TrainConfig, TrainReport, Trainer, CONVERGED_PATIENCE, CONVERGED_TOL};

/// Hidden width used when none is configured.
pub const DEFAULT_HIDDEN: usize = 40;
