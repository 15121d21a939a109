use std::fmt;
use std::str::FromStr;

use super::scg::scg_minimize;
use super::{Mlp, Sample, DEFAULT_HIDDEN};
use crate::error::{Error, Result};

/// Accepted steps changing the loss by less than [`CONVERGED_TOL`] before stopping.
pub const CONVERGED_PATIENCE: usize = 5;
pub const CONVERGED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trainer {
    Scg,
    MomentumGd,
}

impl fmt::Display for Trainer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trainer::Scg => "scg",
            Trainer::MomentumGd => "momentum",
        })
    }
}

impl FromStr for Trainer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scg" => Ok(Trainer::Scg),
            "momentum" | "momentum_gd" => Ok(Trainer::MomentumGd),
            other => Err(Error::Config(format!("unknown trainer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Step size of the momentum trainer. SCG has none.
    pub learning_rate: f64,
    /// Velocity decay of the momentum trainer.
    pub momentum: f64,
    /// Stop once the gradient norm falls to this value.
    pub min_gradient: f64,
    pub max_epochs: usize,
    pub trainer: Trainer,
    pub n_hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.95,
            min_gradient: 1e-8,
            max_epochs: 500,
            trainer: Trainer::Scg,
            n_hidden: DEFAULT_HIDDEN,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig("momentum must be in [0, 1)".into()));
        }
        if !(self.min_gradient > 0.0 && self.min_gradient.is_finite()) {
            return Err(Error::InvalidConfig("min_gradient must be > 0".into()));
        }
        if self.n_hidden == 0 {
            return Err(Error::InvalidConfig("n_hidden must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MinGradient,
    MaxEpochs,
    Converged,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MinGradient => "min-gradient",
            StopReason::MaxEpochs => "max-epochs",
            StopReason::Converged => "converged",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean cross-entropy at the returned parameters.
    pub final_loss: f64,
    /// Euclidean norm of the full gradient at the returned parameters.
    pub final_gradient_norm: f64,
    pub stop_reason: StopReason,
    /// Loss at the start and after every accepted update.
    pub loss_history: Vec<f64>,
}

fn objective<'a>(net: &'a Mlp, data: &'a [Sample]) -> impl FnMut(&[f64]) -> (f64, Vec<f64>) + 'a {
    let mut scratch = net.clone();
    move |params: &[f64]| {
        if scratch.set_params(params).is_err() {
            // a non-finite trial point: report it as infinitely bad so the step is refused
            return (f64::INFINITY, vec![0.0; params.len()]);
        }
        scratch
            .loss_and_gradient(data)
            .expect("dataset validated before training")
    }
}

fn check_data(net: &Mlp, data: &[Sample], cfg: &TrainConfig) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    // surfaces shape and label errors before the optimizer loop
    net.loss_and_gradient(data).map(|_| ())
}

/// Full-batch scaled conjugate gradient.
pub fn train_scg(net: &Mlp, data: &[Sample], cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    check_data(net, data, cfg)?;
    let out = scg_minimize(
        net.params(),
        objective(net, data),
        cfg.max_epochs,
        cfg.min_gradient,
    );
    let mut trained = net.clone();
    trained.set_params(&out.params)?;
    Ok((
        trained,
        TrainReport {
            epochs_run: out.iterations,
            final_loss: out.loss,
            final_gradient_norm: out.grad_norm,
            stop_reason: out.stop,
            loss_history: out.history,
        },
    ))
}

/// Full-batch gradient descent with classical momentum:
/// `v <- momentum * v - learning_rate * grad; params <- params + v`.
pub fn train_momentum(net: &Mlp, data: &[Sample], cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    check_data(net, data, cfg)?;
    let mut f = objective(net, data);
    let mut params = net.params();
    let mut velocity = vec![0.0; params.len()];
    let (mut loss, mut grad) = f(&params);
    let mut history = vec![loss];
    let mut stall = 0usize;
    let mut epochs = 0usize;
    let stop = loop {
        let g_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if g_norm <= cfg.min_gradient {
            break StopReason::MinGradient;
        }
        if stall >= CONVERGED_PATIENCE {
            break StopReason::Converged;
        }
        if epochs >= cfg.max_epochs {
            break StopReason::MaxEpochs;
        }
        epochs += 1;
        for ((v, p), g) in velocity.iter_mut().zip(params.iter_mut()).zip(&grad) {
            *v = cfg.momentum * *v - cfg.learning_rate * g;
            *p += *v;
        }
        let (new_loss, new_grad) = f(&params);
        stall = if (loss - new_loss).abs() < CONVERGED_TOL {
            stall + 1
        } else {
            0
        };
        loss = new_loss;
        grad = new_grad;
        history.push(loss);
    };
    let mut trained = net.clone();
    trained.set_params(&params)?;
    Ok((
        trained,
        TrainReport {
            epochs_run: epochs,
            final_loss: loss,
            final_gradient_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
            stop_reason: stop,
            loss_history: history,
        },
    ))
}

/// Dispatches on `cfg.trainer`.
pub fn train(net: &Mlp, data: &[Sample], cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    match cfg.trainer {
        Trainer::Scg => train_scg(net, data, cfg),
        Trainer::MomentumGd => train_momentum(net, data, cfg),
    }
}
