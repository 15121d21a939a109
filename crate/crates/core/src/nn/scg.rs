//! Scaled conjugate gradient (Møller, 1993) over a flat parameter vector.
//!
//! Curvature along the search direction comes from a finite difference of gradients,
//! and a scalar `lambda` regulates the implied trust region. There is no learning rate.
//! A step is accepted only when the comparison ratio is non-negative, so the objective
//! never increases across accepted steps.

use super::train::{StopReason, CONVERGED_PATIENCE, CONVERGED_TOL};

const SIGMA0: f64 = 1e-4;
const LAMBDA0: f64 = 1e-6;
const LAMBDA_MAX: f64 = 1e100;

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub params: Vec<f64>,
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(xi, pi)| xi + alpha * pi).collect()
}

/// Minimizes `objective`, which returns the value and gradient at a point.
///
/// Stops when the gradient norm is at most `min_gradient`, after `max_iter` iterations,
/// or when [`CONVERGED_PATIENCE`] accepted steps in a row change the value by less than
/// [`CONVERGED_TOL`].
pub fn scg_minimize<F>(x0: Vec<f64>, mut objective: F, max_iter: usize, min_gradient: f64) -> MinimizeOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len().max(1);
    let mut w = x0;
    let (mut e, g) = objective(&w);
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut lambda = LAMBDA0;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut delta = 0.0;
    let mut s = vec![0.0; w.len()];
    let mut history = vec![e];
    let mut stall = 0usize;
    let mut k = 0usize;

    let stop = loop {
        let r_norm = norm(&r);
        if r_norm <= min_gradient {
            break StopReason::MinGradient;
        }
        if stall >= CONVERGED_PATIENCE {
            break StopReason::Converged;
        }
        if k >= max_iter {
            break StopReason::MaxEpochs;
        }
        k += 1;

        let p_sq = dot(&p, &p);
        if success {
            let sigma = SIGMA0 / p_sq.sqrt();
            let (_, g_sigma) = objective(&axpy(&w, sigma, &p));
            s = g_sigma
                .iter()
                .zip(&r)
                .map(|(gs, ri)| (gs + ri) / sigma)
                .collect();
            delta = dot(&p, &s);
        }

        // scale: s += (lambda - lambda_bar) p
        let shift = lambda - lambda_bar;
        s.iter_mut().zip(&p).for_each(|(si, pi)| *si += shift * pi);
        delta += shift * p_sq;

        // make the Hessian estimate positive definite
        if delta <= 0.0 {
            let bump = lambda - 2.0 * delta / p_sq;
            s.iter_mut().zip(&p).for_each(|(si, pi)| *si += bump * pi);
            lambda_bar = 2.0 * (lambda - delta / p_sq);
            delta = -delta + lambda * p_sq;
            lambda = lambda_bar;
        }

        let mu = dot(&p, &r);
        let alpha = mu / delta;
        let w_new = axpy(&w, alpha, &p);
        let (e_new, g_new) = objective(&w_new);
        let comparison = 2.0 * delta * (e - e_new) / (mu * mu);

        if comparison >= 0.0 && e_new.is_finite() {
            let change = (e - e_new).abs();
            let r_new: Vec<f64> = g_new.iter().map(|v| -v).collect();
            w = w_new;
            e = e_new;
            history.push(e);
            stall = if change < CONVERGED_TOL { stall + 1 } else { 0 };
            lambda_bar = 0.0;
            success = true;
            if k.is_multiple_of(n) {
                p = r_new.clone();
            } else {
                let beta = (dot(&r_new, &r_new) - dot(&r_new, &r)) / mu;
                p = r_new.iter().zip(&p).map(|(ri, pi)| ri + beta * pi).collect();
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda = (0.25 * lambda).max(f64::MIN_POSITIVE);
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }

        if comparison < 0.25 {
            lambda = (lambda + delta * (1.0 - comparison) / p_sq).min(LAMBDA_MAX);
        }
    };

    MinimizeOutcome {
        grad_norm: norm(&r),
        params: w,
        loss: e,
        iterations: k,
        stop,
        history,
    }
}
