//! Squared-error losses with optional Frobenius regularizers on the feature
//! states and on the measurement operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{frobenius_norm, outer, CMatrix};
use crate::measurements::simplex_etf_frame;
use crate::quantum::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// `(1/n) Σ ½‖h − y‖²`
    #[default]
    PlainMse,
    /// Adds `λρ/2 Σ_i ‖ρ_i‖²_F + λo/2 Σ_k ‖o_k‖²_F`.
    RegularizedRhoO,
    /// Adds only the feature-state term; operators are held fixed.
    RegularizedRhoFixedO,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct LossConfig {
    pub variant: LossVariant,
    #[serde(default)]
    pub lambda_rho: f64,
    #[serde(default)]
    pub lambda_o: f64,
    /// Targets are simplex frame columns instead of one-hot vectors.
    #[serde(default)]
    pub etf_label_mode: bool,
}

impl LossConfig {
    pub fn plain() -> Self {
        LossConfig::default()
    }

    /// `C1 = K √(n_c λo λρ)`
    pub fn c1(&self, n_c: usize, k: usize) -> f64 {
        k as f64 * (n_c as f64 * self.lambda_o * self.lambda_rho).sqrt()
    }

    /// Checks the hyper-parameter constraints for `n_c` samples per class.
    pub fn validate(&self, n_c: usize, k: usize) -> Result<()> {
        if !(self.lambda_rho >= 0.0 && self.lambda_o >= 0.0) {
            return invalid("regularization weights must be non-negative");
        }
        if self.variant == LossVariant::RegularizedRhoO {
            if self.lambda_o > n_c as f64 * self.lambda_rho {
                return invalid(format!(
                    "lambda_o = {} exceeds n_c·lambda_rho = {}",
                    self.lambda_o,
                    n_c as f64 * self.lambda_rho
                ));
            }
            let c1 = self.c1(n_c, k);
            if c1 > 1.0 {
                return invalid(format!("C1 = {c1} exceeds 1"));
            }
        }
        Ok(())
    }

    pub(crate) fn rho_weight(&self) -> f64 {
        match self.variant {
            LossVariant::PlainMse => 0.0,
            _ => self.lambda_rho,
        }
    }

    pub(crate) fn o_weight(&self) -> f64 {
        match self.variant {
            LossVariant::RegularizedRhoO => self.lambda_o,
            _ => 0.0,
        }
    }
}

/// Target vector for every class: one-hot, or the `K×K` simplex frame columns.
pub fn targets_for(k: usize, etf_label_mode: bool) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return invalid("need at least one class");
    }
    if !etf_label_mode {
        return Ok((0..k).map(|c| (0..k).map(|j| if j == c { 1.0 } else { 0.0 }).collect()).collect());
    }
    let d = (k as f64).log2().ceil() as usize;
    let m = simplex_etf_frame(k, d)?;
    Ok((0..k).map(|c| (0..k).map(|j| m[(j, c)]).collect()).collect())
}

/// Value of a loss split into its parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Mean squared-error risk.
    pub risk: f64,
    pub rho_penalty: f64,
    pub o_penalty: f64,
    pub total: f64,
}

/// Evaluates the configured loss. `features` are the per-sample feature
/// matrices; they only enter through the regularizers.
pub fn loss(
    predictions: &[Vec<f64>],
    targets: &[Vec<f64>],
    features: &[CMatrix],
    operators: &[CMatrix],
    cfg: &LossConfig,
) -> Result<LossBreakdown> {
    let n = predictions.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: targets.len() });
    }
    let mut risk = 0.0;
    for (h, y) in predictions.iter().zip(targets) {
        if h.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: y.len(), found: h.len() });
        }
        risk += 0.5 * h.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    risk /= n as f64;
    let rho_w = cfg.rho_weight();
    let rho_penalty = if rho_w > 0.0 {
        if features.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: features.len() });
        }
        0.5 * rho_w * features.iter().map(|f| frobenius_norm(f).powi(2)).sum::<f64>()
    } else {
        0.0
    };
    let o_penalty = 0.5 * cfg.o_weight() * operators.iter().map(|o| frobenius_norm(o).powi(2)).sum::<f64>();
    Ok(LossBreakdown { risk, rho_penalty, o_penalty, total: risk + rho_penalty + o_penalty })
}

/// A hand-built configuration of feature states and operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticOptimum {
    /// `n_c` copies of each class mean, grouped by class.
    pub features: Vec<CMatrix>,
    pub labels: Vec<usize>,
    pub class_means: Vec<CMatrix>,
    pub operators: Vec<CMatrix>,
    pub c1: f64,
}

fn expand(means: &[CMatrix], n_c: usize) -> (Vec<CMatrix>, Vec<usize>) {
    let mut features = Vec::with_capacity(means.len() * n_c);
    let mut labels = Vec::with_capacity(means.len() * n_c);
    for (k, m) in means.iter().enumerate() {
        for _ in 0..n_c {
            features.push(m.clone());
            labels.push(k);
        }
    }
    (features, labels)
}

/// Minimizer of the doubly regularized loss: collapsed class means
/// `ρ̄_k = s|k><k|` with `s² = (1−C1)√(λo/(n_c λρ))` and aligned operators
/// `o_k = √(n_c λρ/λo) ρ̄_k`, giving `Tr(ρ̄_k o_k) = 1 − C1`.
pub fn regularized_optimum(
    k: usize,
    d_qubits: usize,
    n_c: usize,
    lambda_rho: f64,
    lambda_o: f64,
) -> Result<SyntheticOptimum> {
    let cfg = LossConfig { variant: LossVariant::RegularizedRhoO, lambda_rho, lambda_o, etf_label_mode: false };
    if n_c == 0 || lambda_rho <= 0.0 || lambda_o <= 0.0 {
        return invalid("need n_c >= 1 and positive regularization weights");
    }
    cfg.validate(n_c, k)?;
    if (1usize << d_qubits) < k {
        return invalid(format!("2^{d_qubits} dimensions cannot hold {k} orthogonal means"));
    }
    let c1 = cfg.c1(n_c, k);
    let ratio = n_c as f64 * lambda_rho / lambda_o;
    let s = ((1.0 - c1) / ratio.sqrt()).sqrt();
    let means: Vec<CMatrix> = (0..k)
        .map(|i| outer(StateVector::basis(d_qubits, i).expect("room checked").amplitudes()) * Complex64::new(s, 0.0))
        .collect();
    let operators = means.iter().map(|m| m * Complex64::new(ratio.sqrt(), 0.0)).collect();
    let (features, labels) = expand(&means, n_c);
    Ok(SyntheticOptimum { features, labels, class_means: means, operators, c1 })
}

/// Zero-risk configuration for fixed projective operators: `ρ_k = |k><k|`
/// measured by `|k><k|`.
pub fn fixed_operator_optimum(k: usize, d_qubits: usize, n_c: usize) -> Result<SyntheticOptimum> {
    let ms = crate::measurements::basis_measurements(k, d_qubits)?;
    let means = ms.operators.clone();
    let (features, labels) = expand(&means, n_c);
    Ok(SyntheticOptimum { features, labels, class_means: means, operators: ms.operators, c1: 0.0 })
}

impl SyntheticOptimum {
    pub fn predictions(&self) -> Vec<Vec<f64>> {
        self.features
            .iter()
            .map(|f| self.operators.iter().map(|o| crate::linalg::trace_product(f, o).re).collect())
            .collect()
    }

    pub fn evaluate(&self, cfg: &LossConfig) -> Result<LossBreakdown> {
        let k = self.class_means.len();
        let table = targets_for(k, false)?;
        let targets: Vec<Vec<f64>> = self.labels.iter().map(|&l| table[l].clone()).collect();
        loss(&self.predictions(), &targets, &self.features, &self.operators, cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::alignment;

    fn one_hot(k: usize, c: usize) -> Vec<f64> {
        (0..k).map(|j| if j == c { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn perfect_and_zero_predictions() {
        let y = vec![one_hot(2, 0), one_hot(2, 1)];
        let l = loss(&y, &y, &[], &[], &LossConfig::plain()).unwrap();
        assert_eq!(l.total, 0.0);
        let zero = vec![vec![0.0; 2]; 2];
        let l = loss(&zero, &y, &[], &[], &LossConfig::plain()).unwrap();
        assert!((l.risk - 0.5).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let r = loss(&[vec![0.0; 3]], &[one_hot(2, 0)], &[], &[], &LossConfig::plain());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn constraint_checks() {
        let cfg = LossConfig { variant: LossVariant::RegularizedRhoO, lambda_rho: 0.01, lambda_o: 0.5, etf_label_mode: false };
        assert!(cfg.validate(10, 2).is_err());
        let cfg = LossConfig { lambda_o: 0.2, lambda_rho: 0.2, ..cfg };
        assert!(cfg.validate(10, 2).is_err());
        let cfg = LossConfig { lambda_o: 0.01, lambda_rho: 0.01, ..cfg };
        assert!(cfg.validate(10, 2).is_ok());
        assert!((cfg.c1(10, 2) - 2.0 * (0.001f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn regularized_optimum_values() {
        let (n_c, lr, lo) = (8, 0.02, 0.05);
        let opt = regularized_optimum(2, 1, n_c, lr, lo).unwrap();
        let cfg = LossConfig { variant: LossVariant::RegularizedRhoO, lambda_rho: lr, lambda_o: lo, etf_label_mode: false };
        let l = opt.evaluate(&cfg).unwrap();
        let c1 = 2.0 * (n_c as f64 * lr * lo).sqrt();
        assert!((opt.c1 - c1).abs() < 1e-15);
        assert!((l.risk - c1 * c1 / 2.0).abs() < 1e-12);
        let a = alignment(&opt.class_means, &opt.operators).unwrap();
        assert!((a[0][0] - (1.0 - c1)).abs() < 1e-12 && a[0][1].abs() < 1e-15);
    }

    #[test]
    fn regularized_optimum_is_stationary_under_rescaling() {
        // Scaling ρ̄ by a and o by b only moves the objective up.
        let (n_c, lr, lo) = (6, 0.03, 0.04);
        let opt = regularized_optimum(2, 1, n_c, lr, lo).unwrap();
        let cfg = LossConfig { variant: LossVariant::RegularizedRhoO, lambda_rho: lr, lambda_o: lo, etf_label_mode: false };
        let base = opt.evaluate(&cfg).unwrap().total;
        for a in [0.9, 0.99, 1.01, 1.1] {
            for b in [0.9, 1.0, 1.1] {
                let moved = SyntheticOptimum {
                    features: opt.features.iter().map(|f| f * Complex64::new(a, 0.0)).collect(),
                    operators: opt.operators.iter().map(|o| o * Complex64::new(b, 0.0)).collect(),
                    ..opt.clone()
                };
                assert!(moved.evaluate(&cfg).unwrap().total >= base - 1e-12);
            }
        }
    }

    #[test]
    fn fixed_operator_optimum_is_exact() {
        let opt = fixed_operator_optimum(2, 1, 5).unwrap();
        let cfg = LossConfig { variant: LossVariant::RegularizedRhoFixedO, lambda_rho: 0.0, lambda_o: 0.0, etf_label_mode: false };
        assert!(opt.evaluate(&cfg).unwrap().risk.abs() < 1e-15);
    }

    #[test]
    fn etf_targets() {
        let t = targets_for(3, true).unwrap();
        for i in 0..3 {
            let n: f64 = t[i].iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let ip: f64 = t[0].iter().zip(&t[1]).map(|(a, b)| a * b).sum();
        assert!((ip + 0.5).abs() < 1e-12);
    }

    #[test]
    fn losses_are_non_negative() {
        let opt = regularized_optimum(2, 1, 3, 0.01, 0.02).unwrap();
        for variant in [LossVariant::PlainMse, LossVariant::RegularizedRhoO, LossVariant::RegularizedRhoFixedO] {
            let cfg = LossConfig { variant, lambda_rho: 0.01, lambda_o: 0.02, etf_label_mode: false };
            let l = opt.evaluate(&cfg).unwrap();
            assert!(l.risk >= 0.0 && l.rho_penalty >= 0.0 && l.o_penalty >= 0.0);
        }
    }
}
