//! Exact gradients of the batch objective by the parameter-shift rule.
//!
//! Every trainable gate is `exp(-iθP/2)` with `P² = I`, so each feature state
//! is `A + B cos θ + C sin θ` in any single angle and
//! `∂ρ/∂θ = [ρ(θ + π/2) − ρ(θ − π/2)] / 2` holds exactly.
//!
//! The batch objective is
//! `(1/b) Σ_i [ ½‖h(x_i) − y_i‖² + (w/2) ‖ρ(x_i)‖²_F ]`
//! with `w` the per-sample weight of the feature-state regularizer.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{trace_product, CMatrix};
use crate::quantum::circuit::{run_gates, Gate};
use crate::quantum::density::reduce;
use crate::quantum::{feature_state, AnsatzSpec, StateVector};

/// Mean gradient and mean objective over a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Borrowed pieces a gradient evaluation needs.
#[derive(Clone, Copy, Debug)]
pub struct Problem<'a> {
    pub ansatz: &'a AnsatzSpec,
    pub operators: &'a [CMatrix],
    pub d_qubits: usize,
    /// Weight `w` of `½‖ρ‖²_F` per sample.
    pub rho_weight: f64,
}

impl Problem<'_> {
    fn check(&self, encoded: &[&StateVector], targets: &[&[f64]]) -> Result<()> {
        if encoded.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if encoded.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: encoded.len(), found: targets.len() });
        }
        for s in encoded {
            if s.n_qubits() != self.ansatz.n_qubits {
                return Err(Error::DimensionMismatch { expected: self.ansatz.n_qubits, found: s.n_qubits() });
            }
        }
        for t in targets {
            if t.len() != self.operators.len() {
                return Err(Error::DimensionMismatch { expected: self.operators.len(), found: t.len() });
            }
        }
        Ok(())
    }

    fn objective_of(&self, rho: &CMatrix, target: &[f64]) -> (f64, Vec<f64>) {
        let residual: Vec<f64> =
            self.operators.iter().zip(target).map(|(o, y)| trace_product(rho, o).re - y).collect();
        let mut obj = 0.5 * residual.iter().map(|r| r * r).sum::<f64>();
        if self.rho_weight != 0.0 {
            obj += 0.5 * self.rho_weight * trace_product(rho, rho).re;
        }
        (obj, residual)
    }

    fn sample(&self, layers: &[Vec<Gate>], encoded: &StateVector, target: &[f64]) -> (Vec<f64>, f64) {
        let a = self.ansatz;
        let n = a.n_qubits;
        let per_layer = AnsatzSpec::ROTATIONS_PER_QUBIT * n;

        let mut checkpoints = Vec::with_capacity(a.n_layers);
        let mut state = encoded.clone();
        for gates in layers {
            checkpoints.push(state.clone());
            run_gates(&mut state, gates, &a.params);
        }
        let rho = reduce(state.amplitudes(), n, self.d_qubits);
        let (obj, residual) = self.objective_of(&rho, target);

        let mut shifted = a.params.clone();
        let mut grad = vec![0.0; a.n_params()];
        for (p, g) in grad.iter_mut().enumerate() {
            let layer = p / per_layer;
            let mut shifted_rho = |delta: f64| {
                shifted[p] = a.params[p] + delta;
                let mut s = checkpoints[layer].clone();
                for gates in &layers[layer..] {
                    run_gates(&mut s, gates, &shifted);
                }
                shifted[p] = a.params[p];
                reduce(s.amplitudes(), n, self.d_qubits)
            };
            let plus = shifted_rho(FRAC_PI_2);
            let minus = shifted_rho(-FRAC_PI_2);
            let drho = (plus - minus).unscale(2.0);
            let mut v: f64 = self
                .operators
                .iter()
                .zip(&residual)
                .map(|(o, r)| r * trace_product(&drho, o).re)
                .sum();
            if self.rho_weight != 0.0 {
                v += self.rho_weight * trace_product(&rho, &drho).re;
            }
            *g = v;
        }
        (grad, obj)
    }

    /// Batch objective by plain forward simulation.
    pub fn objective(&self, encoded: &[&StateVector], targets: &[&[f64]]) -> Result<f64> {
        self.check(encoded, targets)?;
        let mut total = 0.0;
        for (s, t) in encoded.iter().zip(targets) {
            let out = self.ansatz.apply((*s).clone())?;
            let rho = feature_state(&out, self.d_qubits)?;
            total += self.objective_of(rho.matrix(), t).0;
        }
        Ok(total / encoded.len() as f64)
    }
}

/// Parameter-shift gradient of the batch objective. Samples are processed in
/// parallel and summed in batch order, so results are bit-reproducible.
pub fn batch_gradient(problem: &Problem<'_>, encoded: &[&StateVector], targets: &[&[f64]]) -> Result<Gradient> {
    problem.check(encoded, targets)?;
    let layers: Vec<Vec<Gate>> = (0..problem.ansatz.n_layers).map(|l| problem.ansatz.layer_gates(l)).collect();
    let per_sample: Vec<(Vec<f64>, f64)> = encoded
        .par_iter()
        .zip(targets.par_iter())
        .map(|(s, t)| problem.sample(&layers, s, t))
        .collect();
    let b = encoded.len() as f64;
    let mut values = vec![0.0; problem.ansatz.n_params()];
    let mut objective = 0.0;
    for (g, o) in &per_sample {
        for (acc, v) in values.iter_mut().zip(g) {
            *acc += v;
        }
        objective += o;
    }
    values.iter_mut().for_each(|v| *v /= b);
    Ok(Gradient { values, objective: objective / b })
}

/// Central finite differences of [`Problem::objective`].
pub fn finite_difference_gradient(
    problem: &Problem<'_>,
    encoded: &[&StateVector],
    targets: &[&[f64]],
    step: f64,
) -> Result<Vec<f64>> {
    let mut a = problem.ansatz.clone();
    let mut out = Vec::with_capacity(a.n_params());
    for p in 0..a.n_params() {
        let orig = a.params[p];
        a.params[p] = orig + step;
        let up = Problem { ansatz: &a, ..*problem }.objective(encoded, targets)?;
        a.params[p] = orig - step;
        let down = Problem { ansatz: &a, ..*problem }.objective(encoded, targets)?;
        a.params[p] = orig;
        out.push((up - down) / (2.0 * step));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_parity;
    use crate::measurements::{basis_measurements, pauli_measurements};
    use crate::quantum::EncoderSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parity_batch(n: usize, idx: &[usize]) -> (Vec<StateVector>, Vec<Vec<f64>>) {
        let ds = gen_parity(n).unwrap();
        let enc = EncoderSpec::basis(n);
        idx.iter()
            .map(|&i| {
                let e = &ds.examples[i % ds.len()];
                let y = if e.label == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
                (enc.encode(&e.features).unwrap(), y)
            })
            .unzip()
    }

    #[test]
    fn matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = basis_measurements(2, 1).unwrap();
        let pauli = pauli_measurements();
        for trial in 0..8 {
            let n = rng.random_range(2..=4);
            let l = rng.random_range(1..=3);
            let ansatz = AnsatzSpec::random(n, l, &mut rng).unwrap();
            let (states, ys) = parity_batch(n, &[trial, trial + 3, trial + 5]);
            let (ops, ys): (&[CMatrix], Vec<Vec<f64>>) = if trial % 2 == 0 {
                (&basis.operators, ys)
            } else {
                (&pauli.operators, ys.iter().map(|_| (0..9).map(|_| rng.random::<f64>()).collect()).collect())
            };
            let d = if trial % 2 == 0 { 1 } else { 2 };
            let prob = Problem { ansatz: &ansatz, operators: ops, d_qubits: d, rho_weight: 0.3 * (trial % 3) as f64 };
            let s: Vec<&StateVector> = states.iter().collect();
            let t: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
            let g = batch_gradient(&prob, &s, &t).unwrap();
            let fd = finite_difference_gradient(&prob, &s, &t, 1e-5).unwrap();
            let dev = g.values.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-6, "trial {trial}: deviation {dev}");
            assert!((g.objective - prob.objective(&s, &t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_at_toy_minimum() {
        // One qubit, one layer: RZ·RY·RZ on |0>. With the middle angle at 0
        // the state is |0> and the loss against target (1, 0) is exactly 0.
        let ansatz = AnsatzSpec::new(1, 1, vec![0.4, 0.0, -1.1]).unwrap();
        let ops = basis_measurements(2, 1).unwrap().operators;
        let prob = Problem { ansatz: &ansatz, operators: &ops, d_qubits: 1, rho_weight: 0.0 };
        let s = StateVector::zero(1);
        let g = batch_gradient(&prob, &[&s], &[&[1.0, 0.0]]).unwrap();
        assert!(g.objective.abs() < 1e-15);
        assert!(g.values.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn duplicated_batch_has_same_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ansatz = AnsatzSpec::random(3, 2, &mut rng).unwrap();
        let ops = basis_measurements(2, 1).unwrap().operators;
        let prob = Problem { ansatz: &ansatz, operators: &ops, d_qubits: 1, rho_weight: 0.1 };
        let (states, ys) = parity_batch(3, &[0, 1, 6]);
        let s: Vec<&StateVector> = states.iter().chain(&states).collect();
        let t: Vec<&[f64]> = ys.iter().chain(&ys).map(Vec::as_slice).collect();
        let g1 = batch_gradient(&prob, &s[..3], &t[..3]).unwrap();
        let g2 = batch_gradient(&prob, &s, &t).unwrap();
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_batches() {
        let ansatz = AnsatzSpec::zeros(2, 1).unwrap();
        let ops = basis_measurements(2, 1).unwrap().operators;
        let prob = Problem { ansatz: &ansatz, operators: &ops, d_qubits: 1, rho_weight: 0.0 };
        assert!(batch_gradient(&prob, &[], &[]).is_err());
        let s = StateVector::zero(3);
        assert!(batch_gradient(&prob, &[&s], &[&[1.0, 0.0]]).is_err());
        let s = StateVector::zero(2);
        assert!(batch_gradient(&prob, &[&s], &[&[1.0]]).is_err());
    }
}
