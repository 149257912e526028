//! Robustness-based generalization bound for quantum classifiers: covering
//! numbers of encoded-state spaces, occupied-cell counts from data, and the
//! assembled bound.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classifier::QuantumClassifier;
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::{frobenius_norm, CMatrix};

/// `ln N = 4^m · N_ge · ln(28 N_ge / ε)`, the log covering number of the
/// states reachable by an encoder with `N_ge` data-dependent gates of arity
/// at most `m`.
pub fn covering_number_log(n_ge: usize, m: u32, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon {epsilon} must be positive"));
    }
    if n_ge == 0 || m == 0 {
        return invalid("need N_ge >= 1 and m >= 1");
    }
    Ok(4f64.powi(m as i32) * n_ge as f64 * (28.0 * n_ge as f64 / epsilon).ln())
}

/// Inputs of [`generalization_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Training set size.
    pub n: usize,
    pub k: usize,
    /// Data-dependent encoding gates.
    pub n_ge: usize,
    /// All encoding gates.
    pub n_g: usize,
    /// Largest gate arity.
    pub m: u32,
    pub epsilon: f64,
    pub delta: f64,
    /// Lipschitz constant of the loss in the prediction.
    pub l1: f64,
    /// Largest operator norm of the measurements.
    pub c2: f64,
    /// Largest per-sample loss.
    pub xi: f64,
    /// Occupied partition cells.
    pub t_d: usize,
    /// Multiplier on the robustness term standing in for the channel norm of
    /// the trained circuit; 1 unless stated otherwise.
    #[serde(default = "one")]
    pub channel_factor: f64,
}

fn one() -> f64 {
    1.0
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 || self.n_ge == 0 || self.m == 0 {
            return invalid("n, K, N_ge and m must be positive");
        }
        if self.n_ge > self.n_g {
            return invalid(format!("N_ge = {} exceeds N_g = {}", self.n_ge, self.n_g));
        }
        if self.t_d == 0 || self.t_d > self.n {
            return invalid(format!("T_D = {} outside [1, n = {}]", self.t_d, self.n));
        }
        if !(self.epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("delta {} outside (0, 1)", self.delta));
        }
        for (name, v) in [("L1", self.l1), ("C2", self.c2), ("xi", self.xi), ("channel_factor", self.channel_factor)] {
            if !(v >= 0.0 && v.is_finite()) {
                return invalid(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    /// `4 L1 K C2 ε`
    pub robustness: f64,
    /// `3 ξ √(T_D 4^m N_ge ln(56 K N_ge/(εδ)) / n)`
    pub sqrt_term: f64,
    /// `2 ξ T_D 4^m N_ge ln(56 K N_ge/(εδ)) / n`
    pub linear_term: f64,
    pub total: f64,
}

/// Generalization error bound for a classifier whose training sample occupies
/// `T_D` cells of an ε-partition.
pub fn generalization_bound(inputs: &BoundInputs) -> Result<BoundTerms> {
    inputs.validate()?;
    let i = inputs;
    let k = i.k as f64;
    let n_ge = i.n_ge as f64;
    let robustness = 4.0 * i.l1 * k * i.c2 * i.epsilon * i.channel_factor;
    let complexity = i.t_d as f64
        * 4f64.powi(i.m as i32)
        * n_ge
        * (56.0 * k * n_ge / (i.epsilon * i.delta)).ln()
        / i.n as f64;
    let sqrt_term = 3.0 * i.xi * complexity.sqrt();
    let linear_term = 2.0 * i.xi * complexity;
    Ok(BoundTerms { robustness, sqrt_term, linear_term, total: robustness + sqrt_term + linear_term })
}

/// Greedy ε-net over labelled states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionEstimate {
    pub epsilon: f64,
    /// Sample index that opened each cell, in scan order.
    pub cell_centers: Vec<usize>,
    pub cell_labels: Vec<usize>,
    pub occupied: usize,
    /// Cell of every sample.
    pub assignment: Vec<usize>,
}

/// Scans samples in index order; a sample joins the first cell of its own
/// label whose center lies within Frobenius distance `ε`, otherwise it opens
/// a new cell.
pub fn estimate_t_d(states: &[CMatrix], labels: &[usize], epsilon: f64) -> Result<PartitionEstimate> {
    if !(epsilon > 0.0) {
        return invalid(format!("epsilon {epsilon} must be positive"));
    }
    if states.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: states.len(), found: labels.len() });
    }
    let mut cell_centers: Vec<usize> = Vec::new();
    let mut cell_labels = Vec::new();
    let mut assignment = Vec::with_capacity(states.len());
    for (i, (s, &l)) in states.iter().zip(labels).enumerate() {
        let hit = cell_centers
            .iter()
            .zip(&cell_labels)
            .position(|(&c, &cl)| cl == l && frobenius_norm(&(s - &states[c])) <= epsilon);
        match hit {
            Some(c) => assignment.push(c),
            None => {
                assignment.push(cell_centers.len());
                cell_centers.push(i);
                cell_labels.push(l);
            }
        }
    }
    Ok(PartitionEstimate { epsilon, occupied: cell_centers.len(), cell_centers, cell_labels, assignment })
}

/// `(L1, ξ)` from predictions: the largest residual norm `‖h − y‖` and the
/// largest per-sample loss `½‖h − y‖²`.
pub fn lipschitz_and_xi(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<(f64, f64)> {
    if predictions.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: targets.len(), found: predictions.len() });
    }
    let mut l1 = 0.0f64;
    for (h, y) in predictions.iter().zip(targets) {
        if h.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), found: h.len() });
        }
        let r = h.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        l1 = l1.max(r);
    }
    Ok((l1, 0.5 * l1 * l1))
}

/// [`lipschitz_and_xi`] over every example of the given datasets.
pub fn lipschitz_and_xi_for(qc: &QuantumClassifier, datasets: &[&Dataset], etf_label_mode: bool) -> Result<(f64, f64)> {
    let table = crate::classifier::targets_for(qc.k(), etf_label_mode)?;
    let mut preds = Vec::new();
    let mut ys = Vec::new();
    for ds in datasets {
        for e in &ds.examples {
            preds.push(qc.predict(&e.features)?);
            ys.push(table[e.label].clone());
        }
    }
    lipschitz_and_xi(&preds, &ys)
}

/// One row of a bound report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub terms: BoundTerms,
}

impl BoundReport {
    pub const CSV_HEADER: [&'static str; 17] = [
        "n",
        "K",
        "N_ge",
        "N_g",
        "m",
        "epsilon",
        "delta",
        "L1",
        "C2",
        "xi",
        "T_D",
        "channel_factor",
        "log_covering",
        "robustness",
        "sqrt_term",
        "linear_term",
        "total",
    ];

    pub fn new(inputs: BoundInputs) -> Result<Self> {
        Ok(BoundReport { terms: generalization_bound(&inputs)?, inputs })
    }

    pub fn csv_row(&self) -> Vec<String> {
        let i = &self.inputs;
        let t = &self.terms;
        let log_cov = covering_number_log(i.n_ge, i.m, i.epsilon).expect("inputs validated");
        [
            i.n as f64,
            i.k as f64,
            i.n_ge as f64,
            i.n_g as f64,
            i.m as f64,
            i.epsilon,
            i.delta,
            i.l1,
            i.c2,
            i.xi,
            i.t_d as f64,
            i.channel_factor,
            log_cov,
            t.robustness,
            t.sqrt_term,
            t.linear_term,
            t.total,
        ]
        .iter()
        .map(f64::to_string)
        .collect()
    }

    pub fn write_csv<W: Write>(reports: &[BoundReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for r in reports {
            w.write_record(r.csv_row())?;
        }
        w.flush()?;
        Ok(())
    }
}
