//! Encoding circuits and the layered hardware-efficient ansatz.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::data::Features;
use crate::error::{invalid, Error, Result};
use crate::linalg::Axis;

/// One gate of a parameterized circuit. Rotation angles are looked up in the
/// parameter vector by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Rotation { axis: Axis, qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

/// Runs `gates` on `state` in place, reading angles from `params`.
pub(crate) fn run_gates(state: &mut StateVector, gates: &[Gate], params: &[f64]) {
    for g in gates {
        match *g {
            Gate::Rotation { axis, qubit, param } => state.rotate(axis, qubit, params[param]),
            Gate::Cnot { control, target } => state.cnot(control, target),
        }
    }
}

/// Layered ansatz: each layer applies `RZ·RY·RZ` to every qubit and then a CNOT
/// ring `i -> (i+1) mod N`.
///
/// Angles are stored layer-major, then qubit, then the three slots in time
/// order, i.e. `params[(l*N + i)*3 + j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub params: Vec<f64>,
}

impl AnsatzSpec {
    pub const ROTATIONS_PER_QUBIT: usize = 3;

    pub fn new(n_qubits: usize, n_layers: usize, params: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 {
            return invalid("ansatz needs at least one qubit");
        }
        let expected = Self::param_count(n_qubits, n_layers);
        if params.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: params.len() });
        }
        Ok(AnsatzSpec { n_qubits, n_layers, params })
    }

    pub fn zeros(n_qubits: usize, n_layers: usize) -> Result<Self> {
        Self::new(n_qubits, n_layers, vec![0.0; Self::param_count(n_qubits, n_layers)])
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, n_layers: usize, rng: &mut R) -> Result<Self> {
        let params = (0..Self::param_count(n_qubits, n_layers))
            .map(|_| rng.random::<f64>() * TAU)
            .collect();
        Self::new(n_qubits, n_layers, params)
    }

    /// `N_t = 3·N·L`
    pub fn param_count(n_qubits: usize, n_layers: usize) -> usize {
        Self::ROTATIONS_PER_QUBIT * n_qubits * n_layers
    }

    /// Layer count realizing exactly `n_params` parameters on `n_qubits`.
    pub fn layers_for(n_qubits: usize, n_params: usize) -> Result<usize> {
        let per_layer = Self::ROTATIONS_PER_QUBIT * n_qubits;
        if per_layer == 0 || n_params % per_layer != 0 {
            return invalid(format!(
                "{n_params} parameters is not a multiple of 3·N = {per_layer}"
            ));
        }
        Ok(n_params / per_layer)
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_index(&self, layer: usize, qubit: usize, slot: usize) -> usize {
        (layer * self.n_qubits + qubit) * Self::ROTATIONS_PER_QUBIT + slot
    }

    /// Gates of one layer, in application order.
    pub fn layer_gates(&self, layer: usize) -> Vec<Gate> {
        let n = self.n_qubits;
        let mut gates = Vec::with_capacity(4 * n);
        for q in 0..n {
            for (slot, axis) in [Axis::Z, Axis::Y, Axis::Z].into_iter().enumerate() {
                gates.push(Gate::Rotation { axis, qubit: q, param: self.param_index(layer, q, slot) });
            }
        }
        if n > 1 {
            for q in 0..n {
                let target = (q + 1) % n;
                // two qubits: the ring degenerates to 0->1, 1->0
                gates.push(Gate::Cnot { control: q, target });
            }
        }
        gates
    }

    pub fn gates(&self) -> Vec<Gate> {
        (0..self.n_layers).flat_map(|l| self.layer_gates(l)).collect()
    }

    /// `U(θ)|state>`
    pub fn apply(&self, state: StateVector) -> Result<StateVector> {
        apply_ansatz(state, self)
    }
}

pub fn apply_ansatz(mut state: StateVector, ansatz: &AnsatzSpec) -> Result<StateVector> {
    if state.n_qubits() != ansatz.n_qubits {
        return Err(Error::DimensionMismatch { expected: ansatz.n_qubits, found: state.n_qubits() });
    }
    let expected = AnsatzSpec::param_count(ansatz.n_qubits, ansatz.n_layers);
    if ansatz.params.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: ansatz.params.len() });
    }
    for l in 0..ansatz.n_layers {
        run_gates(&mut state, &ansatz.layer_gates(l), &ansatz.params);
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    Basis,
    Amplitude,
}

/// Gate bookkeeping of an encoding circuit, consumed by the generalization bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    /// `N_g`
    pub total: usize,
    /// `N_ge`, gates whose action depends on the input
    pub tunable: usize,
    /// `m`, the largest number of qubits any gate touches
    pub max_arity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub kind: EncoderKind,
    pub n_qubits: usize,
    pub gate_counts: GateCounts,
}

impl EncoderSpec {
    /// `|x>` via one conditional X per bit.
    pub fn basis(n_qubits: usize) -> Self {
        EncoderSpec {
            kind: EncoderKind::Basis,
            n_qubits,
            gate_counts: GateCounts { total: n_qubits, tunable: n_qubits, max_arity: 1 },
        }
    }

    /// Direct amplitude loading. Without explicit counts, the bookkeeping of a
    /// real-amplitude uniformly-controlled-RY preparation is assumed:
    /// `2^N - 1` RY gates plus `2^N - 2` CNOTs, arity 2.
    pub fn amplitude(n_qubits: usize, gate_counts: Option<GateCounts>) -> Self {
        let dim = 1usize << n_qubits;
        let gate_counts = gate_counts.unwrap_or(GateCounts {
            total: 2 * dim - 3,
            tunable: dim - 1,
            max_arity: 2,
        });
        EncoderSpec { kind: EncoderKind::Amplitude, n_qubits, gate_counts }
    }

    /// `U_E(x)|0...0>`
    pub fn encode(&self, x: &Features) -> Result<StateVector> {
        match (self.kind, x) {
            (EncoderKind::Basis, Features::Bits(bits)) => {
                if bits.len() != self.n_qubits {
                    return Err(Error::DimensionMismatch { expected: self.n_qubits, found: bits.len() });
                }
                let mut index = 0usize;
                for &b in bits {
                    if b > 1 {
                        return invalid(format!("bit value {b} is not 0 or 1"));
                    }
                    index = (index << 1) | b as usize;
                }
                StateVector::basis(self.n_qubits, index)
            }
            (EncoderKind::Amplitude, Features::Amplitudes(v)) => {
                let dim = 1usize << self.n_qubits;
                if v.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
                }
                StateVector::from_amplitudes(v.iter().map(|&a| Complex64::new(a, 0.0)).collect())
            }
            (EncoderKind::Basis, _) => invalid("basis encoder expects a bitstring"),
            (EncoderKind::Amplitude, _) => invalid("amplitude encoder expects a real vector"),
        }
    }
}

pub fn encode(enc: &EncoderSpec, x: &Features) -> Result<StateVector> {
    enc.encode(x)
}
