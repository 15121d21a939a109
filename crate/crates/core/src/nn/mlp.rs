use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FEATURE_LEN;

/// One training example: inputs and the index of the true class.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

struct Activations {
    hidden: Vec<f64>,
    probs: Vec<f64>,
}

impl Mlp {
    fn check_dims(n_in: usize, n_hidden: usize, n_out: usize) -> Result<()> {
        if n_in == 0 {
            return Err(Error::BadDimensions("need at least one input".into()));
        }
        if n_hidden == 0 {
            return Err(Error::BadDimensions("need at least one hidden unit".into()));
        }
        if n_out < 2 {
            return Err(Error::BadDimensions(format!(
                "softmax output needs >= 2 classes, got {n_out}"
            )));
        }
        Ok(())
    }

    /// Network over the 32 zoning features.
    pub fn init(n_hidden: usize, n_out: usize, seed: u64) -> Result<Self> {
        Self::init_with_inputs(FEATURE_LEN, n_hidden, n_out, seed)
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))` per layer, biases zero.
    pub fn init_with_inputs(n_in: usize, n_hidden: usize, n_out: usize, seed: u64) -> Result<Self> {
        Self::check_dims(n_in, n_hidden, n_out)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layer = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out).map(|_| rng.gen_range(-r..=r)).collect()
        };
        let w1 = layer(n_in, n_hidden);
        let w2 = layer(n_hidden, n_out);
        Ok(Self {
            n_in,
            n_hidden,
            n_out,
            w1,
            b1: vec![0.0; n_hidden],
            w2,
            b2: vec![0.0; n_out],
        })
    }

    /// All parameters zero.
    pub fn zeros(n_in: usize, n_hidden: usize, n_out: usize) -> Result<Self> {
        Self::check_dims(n_in, n_hidden, n_out)?;
        Ok(Self {
            n_in,
            n_hidden,
            n_out,
            w1: vec![0.0; n_in * n_hidden],
            b1: vec![0.0; n_hidden],
            w2: vec![0.0; n_hidden * n_out],
            b2: vec![0.0; n_out],
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Flat parameters, `W1, b1, W2, b2`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend_from_slice(&self.w1);
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.extend_from_slice(&self.b2);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::BadDimensions(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::BadDimensions("non-finite parameter".into()));
        }
        let (w1, rest) = params.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.b1.len());
        let (w2, b2) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2.copy_from_slice(b2);
        Ok(())
    }

    /// Output-layer biases, mutable for callers adjusting the prior.
    pub fn output_bias_mut(&mut self) -> &mut [f64] {
        &mut self.b2
    }

    fn activations(&self, x: &[f64]) -> Activations {
        let hidden: Vec<f64> = (0..self.n_hidden)
            .map(|j| {
                let row = &self.w1[j * self.n_in..(j + 1) * self.n_in];
                let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.b1[j];
                sigmoid(z)
            })
            .collect();
        let mut probs: Vec<f64> = (0..self.n_out)
            .map(|k| {
                let row = &self.w2[k * self.n_hidden..(k + 1) * self.n_hidden];
                row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + self.b2[k]
            })
            .collect();
        softmax_in_place(&mut probs);
        Activations { hidden, probs }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_in {
            return Err(Error::BadDimensions(format!(
                "expected {} inputs, got {}",
                self.n_in,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(())
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.activations(x).probs)
    }

    /// Mean cross-entropy over `batch` and its exact gradient, flattened like
    /// [`Mlp::params`].
    pub fn loss_and_gradient(&self, batch: &[Sample]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        for s in batch {
            self.check_input(&s.x)?;
            if s.label >= self.n_out {
                return Err(Error::LabelOutOfRange {
                    label: s.label,
                    n_out: self.n_out,
                });
            }
        }
        let (nw1, nb1, nw2) = (self.w1.len(), self.b1.len(), self.w2.len());
        let mut grad = vec![0.0; self.n_params()];
        let mut loss = 0.0;
        let mut d_hidden = vec![0.0; self.n_hidden];
        for s in batch {
            let Activations { hidden, mut probs } = self.activations(&s.x);
            loss -= probs[s.label].max(f64::MIN_POSITIVE).ln();
            // softmax + cross-entropy: dL/dz2 = p - onehot
            probs[s.label] -= 1.0;
            let d_out = probs;
            d_hidden.iter_mut().for_each(|d| *d = 0.0);
            for (k, &dk) in d_out.iter().enumerate() {
                let row = k * self.n_hidden;
                for j in 0..self.n_hidden {
                    grad[nw1 + nb1 + row + j] += dk * hidden[j];
                    d_hidden[j] += self.w2[row + j] * dk;
                }
                grad[nw1 + nb1 + nw2 + k] += dk;
            }
            for j in 0..self.n_hidden {
                let dz = d_hidden[j] * hidden[j] * (1.0 - hidden[j]);
                let row = j * self.n_in;
                for (i, &xi) in s.x.iter().enumerate() {
                    grad[row + i] += dz * xi;
                }
                grad[nw1 + j] += dz;
            }
        }
        let n = batch.len() as f64;
        grad.iter_mut().for_each(|g| *g /= n);
        Ok((loss / n, grad))
    }

    /// Index and probability of the most likely class (lowest index on ties).
    pub fn predict(&self, x: &[f64]) -> Result<(usize, f64)> {
        let probs = self.forward(x)?;
        let mut best = 0;
        for (k, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = k;
            }
        }
        Ok((best, probs[best]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = Mlp::init(40, 5, 7).unwrap();
        let b = Mlp::init(40, 5, 7).unwrap();
        assert_eq!(a, b);
        let r1 = (6.0f64 / (32.0 + 40.0)).sqrt();
        let r2 = (6.0f64 / (40.0 + 5.0)).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= r1));
        assert!(a.w2.iter().all(|w| w.abs() <= r2));
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
        assert_ne!(a, Mlp::init(40, 5, 8).unwrap());
    }

    #[test]
    fn single_output_rejected() {
        assert!(matches!(Mlp::init(40, 1, 0), Err(Error::BadDimensions(_))));
        assert!(matches!(Mlp::init(0, 3, 0), Err(Error::BadDimensions(_))));
    }

    #[test]
    fn zero_net_is_uniform() {
        let net = Mlp::zeros(32, 4, 4).unwrap();
        let p = net.forward(&[0.3; 32]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn equal_output_rows_give_uniform_output() {
        let mut net = Mlp::zeros(2, 2, 2).unwrap();
        let mut params = net.params();
        // W1 = [[1,-2],[0.5,3]], W2 rows equal
        params[..4].copy_from_slice(&[1.0, -2.0, 0.5, 3.0]);
        params[6..10].copy_from_slice(&[0.7, -1.1, 0.7, -1.1]);
        net.set_params(&params).unwrap();
        let p = net.forward(&[0.9, -0.4]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input() {
        let net = Mlp::init(4, 3, 0).unwrap();
        let mut x = vec![0.0; 32];
        x[3] = f64::NAN;
        assert!(matches!(net.forward(&x), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn batch_errors() {
        let net = Mlp::init(4, 3, 0).unwrap();
        assert!(matches!(net.loss_and_gradient(&[]), Err(Error::EmptyBatch)));
        let bad = Sample {
            x: vec![0.0; 32],
            label: 3,
        };
        assert!(matches!(
            net.loss_and_gradient(&[bad]),
            Err(Error::LabelOutOfRange { label: 3, n_out: 3 })
        ));
    }

    #[test]
    fn duplicated_sample_has_same_gradient() {
        let net = Mlp::init(6, 3, 11).unwrap();
        let s = Sample {
            x: (0..32).map(|i| (i as f64 * 0.37).sin().abs()).collect(),
            label: 2,
        };
        let (l1, g1) = net.loss_and_gradient(std::slice::from_ref(&s)).unwrap();
        let (l2, g2) = net.loss_and_gradient(&[s.clone(), s]).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn balanced_identical_inputs_cancel_output_bias_gradient() {
        let net = Mlp::init(5, 2, 3).unwrap();
        let x: Vec<f64> = (0..32).map(|i| (i % 5) as f64 / 5.0).collect();
        let batch = [
            Sample { x: x.clone(), label: 0 },
            Sample { x, label: 1 },
        ];
        let (_, g) = net.loss_and_gradient(&batch).unwrap();
        let db2 = &g[g.len() - 2..];
        assert!((db2[0] + db2[1]).abs() < 1e-15);
    }

    #[test]
    fn params_round_trip() {
        let net = Mlp::init(7, 4, 5).unwrap();
        let mut other = Mlp::zeros(32, 7, 4).unwrap();
        other.set_params(&net.params()).unwrap();
        assert_eq!(other, net);
        assert!(other.set_params(&[0.0; 3]).is_err());
    }
}
