//! One-hidden-layer perceptron baseline: ReLU hidden layer, softmax output,
//! squared error against one-hot targets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::argmax;
use super::loss::LossConfig;
use super::optim::AdaGrad;
use super::train::{balanced_count, EpochMetrics, RunInfo, TrainRecord};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};

/// Weights stored flat in the order `w1 (h×d), b1 (h), w2 (K×h), b2 (K)`,
/// matrices row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    pub params: Vec<f64>,
}

struct Forward {
    pre: Vec<f64>,
    act: Vec<f64>,
    probs: Vec<f64>,
}

impl MlpSpec {
    pub fn param_count(input: usize, hidden: usize, output: usize) -> usize {
        input * hidden + hidden + hidden * output + output
    }

    /// Hidden width whose parameter count is closest to `n_params` (at least 1).
    pub fn hidden_for(input: usize, output: usize, n_params: usize) -> usize {
        let per_unit = (input + 1 + output) as f64;
        (((n_params as f64 - output as f64) / per_unit).round() as usize).max(1)
    }

    /// Uniform `±1/√fan_in` initialization for weights and biases.
    pub fn random<R: Rng + ?Sized>(input: usize, hidden: usize, output: usize, rng: &mut R) -> Result<Self> {
        if input == 0 || hidden == 0 || output == 0 {
            return invalid("MLP layer widths must be positive");
        }
        let mut params = Vec::with_capacity(Self::param_count(input, hidden, output));
        let a1 = 1.0 / (input as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        params.extend((0..input * hidden + hidden).map(|_| rng.random_range(-a1..a1)));
        params.extend((0..hidden * output + output).map(|_| rng.random_range(-a2..a2)));
        Ok(MlpSpec { input, hidden, output, params })
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.input * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.output;
        (b1, w2, b2)
    }

    fn forward_full(&self, x: &[f64]) -> Forward {
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        let pre: Vec<f64> = (0..self.hidden)
            .map(|j| p[b1 + j] + (0..self.input).map(|i| p[j * self.input + i] * x[i]).sum::<f64>())
            .collect();
        let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
        let logits: Vec<f64> = (0..self.output)
            .map(|k| p[b2 + k] + (0..self.hidden).map(|j| p[w2 + k * self.hidden + j] * act[j]).sum::<f64>())
            .collect();
        let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - mx).exp()).collect();
        let s: f64 = exps.iter().sum();
        Forward { pre, act, probs: exps.iter().map(|e| e / s).collect() }
    }

    /// Softmax output.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input {
            return Err(Error::DimensionMismatch { expected: self.input, found: x.len() });
        }
        Ok(self.forward_full(x).probs)
    }

    /// `½‖p − y‖²` and its gradient.
    pub fn sample_gradient(&self, x: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.input {
            return Err(Error::DimensionMismatch { expected: self.input, found: x.len() });
        }
        if y.len() != self.output {
            return Err(Error::DimensionMismatch { expected: self.output, found: y.len() });
        }
        let (b1, w2, b2) = self.offsets();
        let f = self.forward_full(x);
        let r: Vec<f64> = f.probs.iter().zip(y).map(|(p, t)| p - t).collect();
        let loss = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        // softmax Jacobian: dz_j = p_j (r_j − Σ_i r_i p_i)
        let rp: f64 = r.iter().zip(&f.probs).map(|(a, b)| a * b).sum();
        let dz: Vec<f64> = f.probs.iter().zip(&r).map(|(p, ri)| p * (ri - rp)).collect();
        let mut g = vec![0.0; self.n_params()];
        let mut da = vec![0.0; self.hidden];
        for k in 0..self.output {
            g[b2 + k] = dz[k];
            for j in 0..self.hidden {
                g[w2 + k * self.hidden + j] = dz[k] * f.act[j];
                da[j] += self.params[w2 + k * self.hidden + j] * dz[k];
            }
        }
        for j in 0..self.hidden {
            let dpre = if f.pre[j] > 0.0 { da[j] } else { 0.0 };
            g[b1 + j] = dpre;
            for i in 0..self.input {
                g[j * self.input + i] = dpre * x[i];
            }
        }
        Ok((loss, g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

fn one_hot(k: usize, c: usize) -> Vec<f64> {
    (0..k).map(|j| if j == c { 1.0 } else { 0.0 }).collect()
}

fn evaluate(mlp: &MlpSpec, xs: &[Vec<f64>], labels: &[usize]) -> (f64, f64) {
    let mut loss = 0.0;
    let mut correct = 0;
    for (x, &l) in xs.iter().zip(labels) {
        let p = mlp.forward_full(x).probs;
        loss += 0.5 * p.iter().enumerate().map(|(k, v)| (v - f64::from(k == l)).powi(2)).sum::<f64>();
        correct += usize::from(argmax(&p) == l);
    }
    let n = xs.len() as f64;
    (loss / n, correct as f64 / n)
}

/// Same protocol and record layout as the quantum classifier; geometry
/// fields stay empty.
pub fn train_mlp(train: &Dataset, test: &Dataset, cfg: &MlpConfig) -> Result<TrainRecord> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.batch_size == 0 {
        return invalid("batch size must be positive");
    }
    balanced_count(train)?;
    let k = train.n_classes;
    let xs: Vec<Vec<f64>> = train.examples.iter().map(|e| e.features.to_real()).collect();
    let txs: Vec<Vec<f64>> = test.examples.iter().map(|e| e.features.to_real()).collect();
    let labels = train.labels();
    let tlabels = test.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mlp = MlpSpec::random(train.feature_width(), cfg.hidden, k, &mut rng)?;
    let mut opt = AdaGrad::new(cfg.learning_rate, mlp.n_params())?;

    let metrics = |mlp: &MlpSpec, epoch: usize| {
        let (train_loss, train_accuracy) = evaluate(mlp, &xs, &labels);
        let (test_loss, test_accuracy) = evaluate(mlp, &txs, &tlabels);
        EpochMetrics {
            epoch,
            train_loss,
            test_loss,
            train_objective: train_loss,
            train_accuracy,
            test_accuracy,
            m1: Vec::new(),
            m2: Vec::new(),
            bloch: None,
        }
    };

    let mut epochs = vec![metrics(&mlp, 0)];
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut g = vec![0.0; mlp.n_params()];
            for &i in batch {
                let (_, gi) = mlp.sample_gradient(&xs[i], &one_hot(k, labels[i]))?;
                g.iter_mut().zip(gi).for_each(|(a, b)| *a += b);
            }
            g.iter_mut().for_each(|v| *v /= batch.len() as f64);
            opt.step(&mut mlp.params, &g)?;
        }
        epochs.push(metrics(&mlp, epoch));
    }

    Ok(TrainRecord {
        info: RunInfo {
            model: "mlp".into(),
            seed: cfg.seed,
            n_train: train.len(),
            n_test: test.len(),
            n_params: mlp.n_params(),
            n_layers: None,
            hidden: Some(cfg.hidden),
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            batch_size: cfg.batch_size,
            loss: LossConfig::plain(),
        },
        epochs,
        final_params: mlp.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Example, FeatureKind, Features};

    #[test]
    fn parameter_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = MlpSpec::random(6, 5, 2, &mut rng).unwrap();
        assert_eq!(m.n_params(), 6 * 5 + 5 + 5 * 2 + 2);
        assert_eq!(MlpSpec::hidden_for(6, 2, 54), 6);
        assert_eq!(MlpSpec::hidden_for(6, 2, 1), 1);
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = MlpSpec::random(3, 4, 5, &mut rng).unwrap();
        let p = m.forward(&[0.3, -1.0, 2.0]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.forward(&[1.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let mut m = MlpSpec::random(4, 5, 3, &mut rng).unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = one_hot(3, rng.random_range(0..3));
            let (_, g) = m.sample_gradient(&x, &y).unwrap();
            let h = 1e-6;
            for p in 0..m.n_params() {
                let orig = m.params[p];
                m.params[p] = orig + h;
                let up = m.sample_gradient(&x, &y).unwrap().0;
                m.params[p] = orig - h;
                let down = m.sample_gradient(&x, &y).unwrap().0;
                m.params[p] = orig;
                assert!((g[p] - (up - down) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn separates_two_points() {
        let ex = |v: f64, label| Example { features: Features::Amplitudes(vec![v]), label };
        let kind = FeatureKind::Bitstring;
        let train = Dataset { examples: vec![ex(0.0, 0), ex(1.0, 1)], n_classes: 2, kind };
        let cfg = MlpConfig { hidden: 4, epochs: 100, learning_rate: 0.1, batch_size: 1, seed: 3 };
        let r = train_mlp(&train, &train, &cfg).unwrap();
        assert_eq!(r.final_metrics().train_accuracy, 1.0);
        assert_eq!(r.epochs.len(), 101);
    }
}
