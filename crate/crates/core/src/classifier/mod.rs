//! The quantum classifier, its losses and training, plus a small MLP baseline.

pub mod gradient;
pub mod loss;
pub mod mlp;
pub mod optim;
pub mod train;

use serde::{Deserialize, Serialize};

use crate::data::Features;
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::measurements::MeasurementSet;
use crate::quantum::{density, feature_state, AnsatzSpec, EncoderSpec, FeatureState, StateVector};

pub use gradient::{batch_gradient, finite_difference_gradient, Gradient, Problem};
pub use loss::{
    fixed_operator_optimum, loss, regularized_optimum, targets_for, LossBreakdown, LossConfig, LossVariant,
    SyntheticOptimum,
};
pub use mlp::{train_mlp, MlpConfig, MlpSpec};
pub use optim::AdaGrad;
pub use train::{train_qc, EpochMetrics, QcSetup, RunInfo, TrainConfig, TrainRecord};

/// Encoder, trainable ansatz and measurement operators acting on the first
/// `D` qubits of the register.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumClassifier {
    pub encoder: EncoderSpec,
    pub ansatz: AnsatzSpec,
    pub measurements: MeasurementSet,
}

impl QuantumClassifier {
    pub fn new(encoder: EncoderSpec, ansatz: AnsatzSpec, measurements: MeasurementSet) -> Result<Self> {
        if encoder.n_qubits != ansatz.n_qubits {
            return Err(Error::DimensionMismatch { expected: encoder.n_qubits, found: ansatz.n_qubits });
        }
        if measurements.d_qubits > ansatz.n_qubits {
            return invalid(format!(
                "measurements act on {} qubits but the register has {}",
                measurements.d_qubits, ansatz.n_qubits
            ));
        }
        Ok(QuantumClassifier { encoder, ansatz, measurements })
    }

    pub fn d_qubits(&self) -> usize {
        self.measurements.d_qubits
    }

    pub fn k(&self) -> usize {
        self.measurements.k()
    }

    /// `ρ(x) = Tr_rest(U(θ) σ(x) U(θ)†)`
    pub fn feature_state(&self, x: &Features) -> Result<FeatureState> {
        let s = self.ansatz.apply(self.encoder.encode(x)?)?;
        feature_state(&s, self.d_qubits())
    }

    /// Feature state of an already-encoded input.
    pub fn feature_state_encoded(&self, encoded: &StateVector) -> Result<FeatureState> {
        let s = self.ansatz.apply(encoded.clone())?;
        feature_state(&s, self.d_qubits())
    }

    /// `h_k(x) = Tr(ρ(x) o_k)` for every operator.
    pub fn predict(&self, x: &Features) -> Result<Vec<f64>> {
        predict_from_state(self.feature_state(x)?.matrix(), &self.measurements.operators)
    }

    pub fn to_doc(&self) -> ClassifierDoc {
        ClassifierDoc {
            encoder: self.encoder,
            ansatz: self.ansatz.clone(),
            measurements: self.measurements.to_doc(),
        }
    }

    pub fn from_doc(doc: &ClassifierDoc) -> Result<Self> {
        let ops = doc.measurements.operators.iter().map(CMatrix::try_from).collect::<Result<Vec<_>>>()?;
        let ms = MeasurementSet::from_operators(doc.measurements.name.clone(), doc.measurements.d_qubits, ops)?;
        let ansatz = AnsatzSpec::new(doc.ansatz.n_qubits, doc.ansatz.n_layers, doc.ansatz.params.clone())?;
        Self::new(doc.encoder, ansatz, ms)
    }
}

/// Serialized form of a [`QuantumClassifier`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierDoc {
    pub encoder: EncoderSpec,
    pub ansatz: AnsatzSpec,
    pub measurements: crate::measurements::MeasurementDoc,
}

pub fn predict(x: &Features, enc: &EncoderSpec, ansatz: &AnsatzSpec, ms: &MeasurementSet) -> Result<Vec<f64>> {
    QuantumClassifier::new(*enc, ansatz.clone(), ms.clone())?.predict(x)
}

/// `Tr(ρ o_k)` for a raw feature matrix.
pub fn predict_from_state(rho: &CMatrix, operators: &[CMatrix]) -> Result<Vec<f64>> {
    operators.iter().map(|o| density::expectation_matrix(rho, o)).collect()
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Class whose target is closest to `h`. For one-hot targets this is the
/// argmax of `h`; for equal-norm frame targets it is the largest `h·t_k`.
pub fn decide(h: &[f64], targets: &[Vec<f64>]) -> usize {
    let scores: Vec<f64> = targets.iter().map(|t| t.iter().zip(h).map(|(a, b)| a * b).sum()).collect();
    argmax(&scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_parity;
    use crate::linalg::{identity, trace_product};
    use crate::measurements::{basis_measurements, embed, pauli_measurements};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_prediction_of_zero_state() {
        let ms = basis_measurements(2, 1).unwrap();
        let rho = StateVector::zero(1).density_matrix();
        assert_eq!(predict_from_state(&rho, &ms.operators).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn maximally_mixed_gives_zero_pauli() {
        let rho = identity(4).unscale(4.0);
        let h = predict_from_state(&rho, &pauli_measurements().operators).unwrap();
        assert!(h.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn argmax_tie_break() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.3]), 2);
    }

    #[test]
    fn dimension_checks() {
        let enc = EncoderSpec::basis(3);
        let ans = AnsatzSpec::zeros(2, 1).unwrap();
        assert!(QuantumClassifier::new(enc, ans, basis_measurements(2, 1).unwrap()).is_err());
        let enc = EncoderSpec::basis(1);
        let ans = AnsatzSpec::zeros(1, 1).unwrap();
        assert!(QuantumClassifier::new(enc, ans, pauli_measurements()).is_err());
    }

    #[test]
    fn doc_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let qc = QuantumClassifier::new(
            EncoderSpec::basis(3),
            AnsatzSpec::random(3, 2, &mut rng).unwrap(),
            basis_measurements(2, 1).unwrap(),
        )
        .unwrap();
        let text = serde_json::to_string(&qc.to_doc()).unwrap();
        let back = QuantumClassifier::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, qc);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn reduced_prediction_matches_full_register(seed in any::<u64>(), n in 2usize..=4, layers in 1usize..=3, pauli in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ms = if pauli { pauli_measurements() } else { basis_measurements(2, 1).unwrap() };
            let ds = gen_parity(n).unwrap();
            let x = &ds.examples[(seed % (1 << n)) as usize].features;
            let qc = QuantumClassifier::new(EncoderSpec::basis(n), AnsatzSpec::random(n, layers, &mut rng).unwrap(), ms).unwrap();
            let h = qc.predict(x).unwrap();
            let full = qc.ansatz.apply(qc.encoder.encode(x).unwrap()).unwrap().density_matrix();
            for (k, o) in qc.measurements.operators.iter().enumerate() {
                let want = trace_product(&full, &embed(o, n).unwrap()).re;
                prop_assert!((h[k] - want).abs() < 1e-9);
            }
        }

        #[test]
        fn basis_predictions_are_probabilities(seed in any::<u64>(), n in 1usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ms = basis_measurements(2, 1).unwrap();
            let qc = QuantumClassifier::new(EncoderSpec::basis(n), AnsatzSpec::random(n, 2, &mut rng).unwrap(), ms).unwrap();
            let h = qc.predict(&Features::Bits(vec![1; n])).unwrap();
            prop_assert!(h.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v)));
            prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn common_scaling_keeps_labels(seed in any::<u64>(), c in 0.01f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ms = pauli_measurements();
            let qc = QuantumClassifier::new(EncoderSpec::basis(3), AnsatzSpec::random(3, 2, &mut rng).unwrap(), ms.clone()).unwrap();
            let scaled = QuantumClassifier { measurements: ms.scaled(c).unwrap(), ..qc.clone() };
            for ex in gen_parity(3).unwrap().examples {
                prop_assert_eq!(argmax(&qc.predict(&ex.features).unwrap()), argmax(&scaled.predict(&ex.features).unwrap()));
            }
        }
    }
}
