//! Class-mean geometry of feature states: within-class spread, between-class
//! overlap, alignment with the measurement operators, and frame structure.
//!
//! All functions take raw Hermitian matrices so they apply equally to trained
//! feature states and to hand-built configurations.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{ensure_square, frobenius_norm, hs_inner_re, trace_product, CMatrix, MatrixDoc};

/// Splits `states` into `k` groups by label, preserving order.
pub fn group_by_label(states: &[CMatrix], labels: &[usize], k: usize) -> Result<Vec<Vec<CMatrix>>> {
    if states.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: states.len(), found: labels.len() });
    }
    let mut groups = vec![Vec::new(); k];
    for (s, &l) in states.iter().zip(labels) {
        if l >= k {
            return invalid(format!("label {l} >= K = {k}"));
        }
        groups[l].push(s.clone());
    }
    Ok(groups)
}

fn check_groups(groups: &[Vec<CMatrix>]) -> Result<usize> {
    let mut dim = None;
    for (k, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(Error::EmptyClass(k));
        }
        for s in g {
            let d = *dim.get_or_insert(s.nrows());
            ensure_square(s, d)?;
        }
    }
    dim.ok_or(Error::EmptyDataset)
}

/// Arithmetic mean of each class.
pub fn class_means(groups: &[Vec<CMatrix>]) -> Result<Vec<CMatrix>> {
    let dim = check_groups(groups)?;
    Ok(groups
        .iter()
        .map(|g| {
            let sum = g.iter().fold(CMatrix::zeros(dim, dim), |acc, s| acc + s);
            sum.unscale(g.len() as f64)
        })
        .collect())
}

/// Per-class sum of Frobenius distances to the class mean.
pub fn m1(groups: &[Vec<CMatrix>]) -> Result<Vec<f64>> {
    let means = class_means(groups)?;
    Ok(groups
        .iter()
        .zip(&means)
        .map(|(g, mean)| g.iter().map(|s| frobenius_norm(&(s - mean))).sum())
        .collect())
}

/// `Tr(ρ̄_k ρ̄_k')` for every pair of class means.
pub fn m2(means: &[CMatrix]) -> Vec<Vec<f64>> {
    means
        .iter()
        .map(|a| means.iter().map(|b| trace_product(a, b).re).collect())
        .collect()
}

/// `Tr(ρ̄_k o_k')`; rows follow classes, columns follow operators.
pub fn alignment(means: &[CMatrix], operators: &[CMatrix]) -> Result<Vec<Vec<f64>>> {
    for m in means {
        for o in operators {
            ensure_square(o, m.nrows())?;
        }
    }
    Ok(means
        .iter()
        .map(|m| operators.iter().map(|o| trace_product(m, o).re).collect())
        .collect())
}

/// Pairwise real inner products of the class means after removing their
/// global mean.
pub fn mean_subtracted_gram(means: &[CMatrix]) -> Vec<Vec<f64>> {
    if means.is_empty() {
        return Vec::new();
    }
    let (r, c) = means[0].shape();
    let mu = means.iter().fold(CMatrix::zeros(r, c), |a, m| a + m).unscale(means.len() as f64);
    let dev: Vec<CMatrix> = means.iter().map(|m| m - &mu).collect();
    dev.iter().map(|a| dev.iter().map(|b| hs_inner_re(a, b)).collect()).collect()
}

/// [`mean_subtracted_gram`] for real column vectors.
pub fn mean_subtracted_gram_columns(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let k = cols.ncols();
    let mu = cols.column_mean();
    let mut dev = cols.clone();
    for mut c in dev.column_iter_mut() {
        c -= &mu;
    }
    DMatrix::from_fn(k, k, |i, j| dev.column(i).dot(&dev.column(j)))
}

/// Lower bound on the error of discriminating `K` equiprobable states with
/// pairwise fidelity at least `f`, given `m_meas` copies:
/// `(K−1)/(2K) · f^{m/2}`.
pub fn discrimination_lower_bound(k: usize, f: f64, m_meas: u32) -> Result<f64> {
    if k < 2 {
        return invalid("discrimination needs K >= 2");
    }
    if !(0.0..=1.0).contains(&f) {
        return invalid(format!("fidelity {f} outside [0, 1]"));
    }
    if m_meas == 0 {
        return invalid("need at least one measured copy");
    }
    let kf = k as f64;
    Ok((kf - 1.0) / (2.0 * kf) * f.powf(m_meas as f64 / 2.0))
}

/// Pairwise fidelity `(K−2^D)/(2^D(K−1))` of a unit-norm equiangular tight
/// frame of `K ≥ 2^D` vectors in dimension `2^D`.
pub fn formal_etf_fidelity(k: usize, d_qubits: u32) -> Result<f64> {
    let dim = 2f64.powi(d_qubits as i32);
    let kf = k as f64;
    if k < 2 || kf < dim {
        return invalid(format!("need K >= 2^D, got K = {k}, D = {d_qubits}"));
    }
    Ok((kf - dim) / (dim * (kf - 1.0)))
}

/// Everything the geometry metrics say about one set of labelled feature states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub k: usize,
    pub m1_per_class: Vec<f64>,
    pub m2_matrix: Vec<Vec<f64>>,
    pub alignment_matrix: Vec<Vec<f64>>,
    pub gram_mean_subtracted: Vec<Vec<f64>>,
    pub class_means: Vec<MatrixDoc>,
    /// Bloch vectors of the class means when the features are single qubits.
    pub class_mean_bloch: Option<Vec<[f64; 3]>>,
}

impl GeometryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn analyze(states: &[CMatrix], labels: &[usize], k: usize, operators: &[CMatrix]) -> Result<GeometryReport> {
    let groups = group_by_label(states, labels, k)?;
    let means = class_means(&groups)?;
    let class_mean_bloch = (means[0].nrows() == 2).then(|| means.iter().map(bloch).collect());
    Ok(GeometryReport {
        k,
        m1_per_class: m1(&groups)?,
        m2_matrix: m2(&means),
        alignment_matrix: alignment(&means, operators)?,
        gram_mean_subtracted: mean_subtracted_gram(&means),
        class_means: means.iter().map(MatrixDoc::from).collect(),
        class_mean_bloch,
    })
}

fn bloch(m: &CMatrix) -> [f64; 3] {
    crate::linalg::Axis::ALL.map(|a| trace_product(m, &a.matrix()).re)
}
