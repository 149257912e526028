//! Mini-batch AdaGrad training of the quantum classifier with per-epoch
//! metrics.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gradient::{batch_gradient, Problem};
use super::loss::{loss, targets_for, LossConfig};
use super::optim::AdaGrad;
use super::{decide, QuantumClassifier};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::geometry::{class_means, group_by_label, m1, m2};
use crate::linalg::{trace_product, Axis, CMatrix};
use crate::measurements::MeasurementSet;
use crate::quantum::density::reduce;
use crate::quantum::{AnsatzSpec, EncoderSpec, StateVector};

/// Fixed parts of a quantum classifier: everything but the angles.
#[derive(Clone, Debug, PartialEq)]
pub struct QcSetup {
    pub encoder: EncoderSpec,
    pub measurements: MeasurementSet,
    pub n_layers: usize,
}

impl QcSetup {
    pub fn n_params(&self) -> usize {
        AnsatzSpec::param_count(self.encoder.n_qubits, self.n_layers)
    }

    pub fn classifier(&self, params: Vec<f64>) -> Result<QuantumClassifier> {
        let ansatz = AnsatzSpec::new(self.encoder.n_qubits, self.n_layers, params)?;
        QuantumClassifier::new(self.encoder, ansatz, self.measurements.clone())
    }
}

/// Optimization settings shared by the quantum and classical models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub loss: LossConfig,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.batch_size == 0 {
            return invalid("batch size must be positive");
        }
        Ok(())
    }
}

/// Identification of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub model: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub n_params: usize,
    pub n_layers: Option<usize>,
    pub hidden: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub loss: LossConfig,
}

/// Metrics after `epoch` passes over the training set (0 = initialization).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean squared-error risk on the training set.
    pub train_loss: f64,
    pub test_loss: f64,
    /// Training risk plus active regularizers.
    pub train_objective: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Within-class spread of training feature states, per class.
    #[serde(default)]
    pub m1: Vec<f64>,
    /// Overlaps of training class means.
    #[serde(default)]
    pub m2: Vec<Vec<f64>>,
    /// Bloch vectors of the training feature states when they are single qubits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<[f64; 3]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub info: RunInfo,
    /// `epochs + 1` entries; entry 0 is the untrained model.
    pub epochs: Vec<EpochMetrics>,
    pub final_params: Vec<f64>,
}

#[derive(Serialize)]
struct EpochLine<'a> {
    model: &'a str,
    seed: u64,
    #[serde(flatten)]
    metrics: &'a EpochMetrics,
}

impl TrainRecord {
    pub fn final_metrics(&self) -> &EpochMetrics {
        self.epochs.last().expect("record holds the initial evaluation")
    }

    pub fn initial_metrics(&self) -> &EpochMetrics {
        &self.epochs[0]
    }

    /// Mean test loss over the last `window` epochs (including the final one).
    pub fn tail_test_loss(&self, window: usize) -> f64 {
        let w = window.clamp(1, self.epochs.len());
        self.epochs[self.epochs.len() - w..].iter().map(|e| e.test_loss).sum::<f64>() / w as f64
    }

    /// One JSON object per epoch.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for m in &self.epochs {
            let line = EpochLine { model: &self.info.model, seed: self.info.seed, metrics: m };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub const SUMMARY_HEADER: [&'static str; 9] = [
        "model",
        "seed",
        "n",
        "n_params",
        "epochs",
        "final_train_loss",
        "final_test_loss",
        "final_train_acc",
        "final_test_acc",
    ];

    pub fn summary_row(&self) -> Vec<String> {
        let f = self.final_metrics();
        vec![
            self.info.model.clone(),
            self.info.seed.to_string(),
            self.info.n_train.to_string(),
            self.info.n_params.to_string(),
            self.info.epochs.to_string(),
            f.train_loss.to_string(),
            f.test_loss.to_string(),
            f.train_accuracy.to_string(),
            f.test_accuracy.to_string(),
        ]
    }

    pub fn write_summary_csv<W: Write>(records: &[TrainRecord], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::SUMMARY_HEADER)?;
        for r in records {
            w.write_record(r.summary_row())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples per class, which must be equal across classes.
pub(crate) fn balanced_count(ds: &Dataset) -> Result<usize> {
    let counts = ds.class_counts();
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(k));
    }
    if counts.iter().any(|&c| c != counts[0]) {
        return invalid(format!("training set is not class-balanced: {counts:?}"));
    }
    Ok(counts[0])
}

struct Evaluation {
    risk: f64,
    objective: f64,
    accuracy: f64,
    features: Vec<CMatrix>,
}

fn evaluate(
    encoded: &[StateVector],
    labels: &[usize],
    qc: &QuantumClassifier,
    targets: &[Vec<f64>],
    cfg: &LossConfig,
) -> Result<Evaluation> {
    let n = qc.ansatz.n_qubits;
    let d = qc.d_qubits();
    let ops = &qc.measurements.operators;
    let features: Vec<CMatrix> = encoded
        .par_iter()
        .map(|s| {
            let mut s = s.clone();
            for l in 0..qc.ansatz.n_layers {
                crate::quantum::circuit::run_gates(&mut s, &qc.ansatz.layer_gates(l), &qc.ansatz.params);
            }
            reduce(s.amplitudes(), n, d)
        })
        .collect();
    let preds: Vec<Vec<f64>> = features
        .iter()
        .map(|rho| ops.iter().map(|o| trace_product(rho, o).re).collect())
        .collect();
    let ys: Vec<Vec<f64>> = labels.iter().map(|&l| targets[l].clone()).collect();
    let lb = loss(&preds, &ys, &features, ops, cfg)?;
    let correct = preds.iter().zip(labels).filter(|(h, &l)| decide(h, targets) == l).count();
    Ok(Evaluation {
        risk: lb.risk,
        objective: lb.total,
        accuracy: correct as f64 / labels.len() as f64,
        features,
    })
}

fn encode_all(enc: &EncoderSpec, ds: &Dataset) -> Result<Vec<StateVector>> {
    ds.examples.iter().map(|e| enc.encode(&e.features)).collect()
}

/// Trains angles from a uniform `[0, 2π)` start drawn from `cfg.seed`.
/// Batches are reshuffled every epoch from the same generator.
pub fn train_qc(train: &Dataset, test: &Dataset, setup: &QcSetup, cfg: &TrainConfig) -> Result<TrainRecord> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let k = setup.measurements.k();
    if train.n_classes != k || test.n_classes != k {
        return invalid(format!("dataset has {} classes but {k} measurement operators", train.n_classes));
    }
    let n_c = balanced_count(train)?;
    cfg.loss.validate(n_c, k)?;
    let targets = targets_for(k, cfg.loss.etf_label_mode)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ansatz = AnsatzSpec::random(setup.encoder.n_qubits, setup.n_layers, &mut rng)?;
    let mut qc = QuantumClassifier::new(setup.encoder, ansatz, setup.measurements.clone())?;

    let train_states = encode_all(&setup.encoder, train)?;
    let test_states = encode_all(&setup.encoder, test)?;
    let train_labels = train.labels();
    let test_labels = test.labels();
    let rho_weight = cfg.loss.rho_weight() * train.len() as f64;

    let record_epoch = |qc: &QuantumClassifier, epoch: usize| -> Result<EpochMetrics> {
        let tr = evaluate(&train_states, &train_labels, qc, &targets, &cfg.loss)?;
        let te = evaluate(&test_states, &test_labels, qc, &targets, &cfg.loss)?;
        let groups = group_by_label(&tr.features, &train_labels, k)?;
        let means = class_means(&groups)?;
        let bloch = (qc.d_qubits() == 1).then(|| {
            tr.features
                .iter()
                .map(|rho| Axis::ALL.map(|a| trace_product(rho, &a.matrix()).re))
                .collect()
        });
        Ok(EpochMetrics {
            epoch,
            train_loss: tr.risk,
            test_loss: te.risk,
            train_objective: tr.objective,
            train_accuracy: tr.accuracy,
            test_accuracy: te.accuracy,
            m1: m1(&groups)?,
            m2: m2(&means),
            bloch,
        })
    };

    let mut epochs = Vec::with_capacity(cfg.epochs + 1);
    epochs.push(record_epoch(&qc, 0)?);
    let mut opt = AdaGrad::new(cfg.learning_rate, qc.ansatz.n_params())?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let states: Vec<&StateVector> = batch.iter().map(|&i| &train_states[i]).collect();
            let ys: Vec<&[f64]> = batch.iter().map(|&i| targets[train_labels[i]].as_slice()).collect();
            let problem = Problem {
                ansatz: &qc.ansatz,
                operators: &qc.measurements.operators,
                d_qubits: qc.d_qubits(),
                rho_weight,
            };
            let g = batch_gradient(&problem, &states, &ys)?;
            opt.step(&mut qc.ansatz.params, &g.values)?;
        }
        epochs.push(record_epoch(&qc, epoch)?);
    }

    Ok(TrainRecord {
        info: RunInfo {
            model: "qc".into(),
            seed: cfg.seed,
            n_train: train.len(),
            n_test: test.len(),
            n_params: qc.ansatz.n_params(),
            n_layers: Some(setup.n_layers),
            hidden: None,
            epochs: cfg.epochs,
            learning_rate: cfg.learning_rate,
            batch_size: cfg.batch_size,
            loss: cfg.loss,
        },
        epochs,
        final_params: qc.ansatz.params,
    })
}
