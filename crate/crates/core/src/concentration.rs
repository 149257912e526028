//! Haar moment formulas and empirical concentration of deep random circuits.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::linalg::{ensure_hermitian, ensure_square, trace, trace_product, CMatrix};
use crate::quantum::{feature_state, haar_unitary, AnsatzSpec, StateVector};

/// `E_W Tr(W A W† B) = Tr(A) Tr(B) / d` over Haar `W`.
pub fn moment1_oracle(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    let d = a.nrows();
    if d == 0 {
        return invalid("empty matrix");
    }
    ensure_square(a, d)?;
    ensure_square(b, d)?;
    Ok(trace(a) * trace(b) / d as f64)
}

/// `E_W Tr(W A W† B) Tr(W C W† D)` over Haar `W`.
pub fn moment2_oracle(a: &CMatrix, b: &CMatrix, c: &CMatrix, dm: &CMatrix) -> Result<Complex64> {
    let d = a.nrows();
    if d < 2 {
        return invalid(format!("second moment needs d >= 2, got {d}"));
    }
    for m in [a, b, c, dm] {
        ensure_square(m, d)?;
    }
    let (ta, tb, tc, td) = (trace(a), trace(b), trace(c), trace(dm));
    let tac = trace_product(a, c);
    let tbd = trace_product(b, dm);
    let df = d as f64;
    let denom = df * df - 1.0;
    Ok((ta * tb * tc * td + tac * tbd) / denom - (tac * tb * td + ta * tc * tbd) / (df * denom))
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Estimate { mean, variance, std_error: (variance / n as f64).sqrt(), samples: n }
    }

    /// `|mean − target| ≤ z·SE`
    pub fn agrees_with(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.std_error
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Monte-Carlo average of `f(W)` over `samples` Haar unitaries of size `dim`.
/// Sample `i` uses stream `i` of the seeded generator. `f` must return a real
/// number; for Hermitian inputs the integrands here are real.
pub fn haar_average<F>(dim: usize, samples: usize, seed: u64, f: F) -> Result<Estimate>
where
    F: Fn(&CMatrix) -> f64 + Sync,
{
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| haar_unitary(dim, &mut stream_rng(seed, i)).map(|w| f(&w)))
        .collect::<Result<_>>()?;
    Ok(Estimate::from_values(&values))
}

/// `Tr(W A W† B)`
pub fn conjugated_trace(w: &CMatrix, a: &CMatrix, b: &CMatrix) -> Complex64 {
    trace_product(&(w * a * w.adjoint()), b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    EncoderOverlap,
    AnsatzOutput,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::EncoderOverlap => "encoder_overlap",
            Quantity::AnsatzOutput => "ansatz_output",
        }
    }
}

/// How the pair of encoded states is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Both states random in every trial.
    #[default]
    BothRandom,
    /// The first state is drawn once and reused.
    FixedFirst,
}

/// Result of one concentration experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrial {
    pub quantity: Quantity,
    pub n_qubits: usize,
    pub d_qubits: usize,
    pub depth: usize,
    pub trials: usize,
    pub delta: f64,
    /// Value the samples should concentrate around.
    pub center: f64,
    pub bound: f64,
    pub estimate: Estimate,
    pub violation_rate: f64,
    /// Whether `depth ≥ 2N`, the depth used as a 2-design proxy.
    pub deep_enough: bool,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl ConcentrationTrial {
    pub const CSV_HEADER: [&'static str; 12] = [
        "quantity",
        "N",
        "D",
        "depth",
        "trials",
        "delta",
        "mean",
        "variance",
        "bound",
        "violation_rate",
        "center",
        "std_error",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.quantity.as_str().into(),
            self.n_qubits.to_string(),
            self.d_qubits.to_string(),
            self.depth.to_string(),
            self.trials.to_string(),
            self.delta.to_string(),
            self.estimate.mean.to_string(),
            self.estimate.variance.to_string(),
            self.bound.to_string(),
            self.violation_rate.to_string(),
            self.center.to_string(),
            self.estimate.std_error.to_string(),
        ]
    }

    pub fn write_csv<W: Write>(trials: &[ConcentrationTrial], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for t in trials {
            w.write_record(t.csv_row())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parameters shared by both verifiers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub n_qubits: usize,
    pub depth: usize,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
}

impl TrialPlan {
    pub const MIN_TRIALS: usize = 100;

    fn validate(&self) -> Result<()> {
        if self.trials < Self::MIN_TRIALS {
            return invalid(format!("{} trials is below the minimum of {}", self.trials, Self::MIN_TRIALS));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("delta {} outside (0, 1)", self.delta));
        }
        if self.n_qubits == 0 || self.depth == 0 {
            return invalid("need at least one qubit and one layer");
        }
        Ok(())
    }

    fn random_state(&self, rng: &mut ChaCha8Rng) -> Result<StateVector> {
        AnsatzSpec::random(self.n_qubits, self.depth, rng)?.apply(StateVector::zero(self.n_qubits))
    }
}

fn finish(
    plan: &TrialPlan,
    quantity: Quantity,
    d_qubits: usize,
    center: f64,
    bound: f64,
    values: Vec<f64>,
    strict: bool,
) -> ConcentrationTrial {
    let violations = values
        .iter()
        .filter(|v| {
            let dev = (*v - center).abs();
            if strict { dev >= bound } else { dev > bound }
        })
        .count();
    ConcentrationTrial {
        quantity,
        n_qubits: plan.n_qubits,
        d_qubits,
        depth: plan.depth,
        trials: plan.trials,
        delta: plan.delta,
        center,
        bound,
        estimate: Estimate::from_values(&values),
        violation_rate: violations as f64 / values.len() as f64,
        deep_enough: plan.depth >= 2 * plan.n_qubits,
        values,
    }
}

/// Overlap `|<ψ|φ>|²` of two random-parameter circuits, checked against
/// `|overlap − 1/2^N| ≤ √(3/(2^{2N} δ))`.
pub fn verify_encoder_concentration(plan: &TrialPlan, mode: PairMode) -> Result<ConcentrationTrial> {
    plan.validate()?;
    let fixed = match mode {
        PairMode::FixedFirst => Some(plan.random_state(&mut stream_rng(plan.seed, u64::MAX))?),
        PairMode::BothRandom => None,
    };
    let values: Vec<f64> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(plan.seed, t);
            let a = match &fixed {
                Some(s) => s.clone(),
                None => plan.random_state(&mut rng)?,
            };
            let b = plan.random_state(&mut rng)?;
            Ok(a.fidelity(&b))
        })
        .collect::<Result<_>>()?;
    let dim = 2f64.powi(plan.n_qubits as i32);
    let bound = (3.0 / (dim * dim * plan.delta)).sqrt();
    Ok(finish(plan, Quantity::EncoderOverlap, plan.n_qubits, 1.0 / dim, bound, values, false))
}

/// `Tr(ρ o)` for the `D`-qubit reduced state of random-parameter circuits on
/// a fixed input, checked against
/// `|Tr(ρ o) − Tr(o)/2^D| < √((Tr(o)² + 2 Tr(o²)) / (2^{2D} δ))`.
pub fn verify_ansatz_concentration(
    plan: &TrialPlan,
    o: &CMatrix,
    input: Option<&StateVector>,
) -> Result<ConcentrationTrial> {
    plan.validate()?;
    let dim_d = o.nrows();
    if dim_d == 0 || !dim_d.is_power_of_two() {
        return invalid("operator size must be a power of two");
    }
    let d = dim_d.trailing_zeros() as usize;
    if d > plan.n_qubits {
        return invalid(format!("operator on {d} qubits exceeds the {}-qubit register", plan.n_qubits));
    }
    ensure_hermitian(o, 1e-10)?;
    let zero = StateVector::zero(plan.n_qubits);
    let input = input.unwrap_or(&zero);
    if input.n_qubits() != plan.n_qubits {
        return Err(Error::DimensionMismatch { expected: plan.n_qubits, found: input.n_qubits() });
    }
    let values: Vec<f64> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(plan.seed, t);
            let a = AnsatzSpec::random(plan.n_qubits, plan.depth, &mut rng)?;
            let rho = feature_state(&a.apply(input.clone())?, d)?;
            rho.expectation(o)
        })
        .collect::<Result<_>>()?;
    let tr = trace(o).re;
    let tr2 = trace_product(o, o).re;
    let dd = dim_d as f64;
    let bound = ((tr * tr + 2.0 * tr2) / (dd * dd * plan.delta)).sqrt();
    Ok(finish(plan, Quantity::AnsatzOutput, d, tr / dd, bound, values, true))
}
