//! Risk-curve estimation: sweep model sizes, average the recorded test
//! losses, fit a polynomial in the parameter count and locate its minimum.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{train_mlp, train_qc, LossConfig, MlpConfig, MlpSpec, QcSetup, TrainConfig, TrainRecord};
use crate::data::{balanced_subsample, split, Dataset};
use crate::error::{invalid, Error, Result};
use crate::measurements::MeasurementSet;
use crate::quantum::{AnsatzSpec, EncoderSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qc,
    Mlp,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Qc => "qc",
            ModelKind::Mlp => "mlp",
        }
    }
}

/// Which models a sweep trains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    #[default]
    Qc,
    Mlp,
    Both,
}

impl SweepKind {
    pub fn models(self) -> Vec<ModelKind> {
        match self {
            SweepKind::Qc => vec![ModelKind::Qc],
            SweepKind::Mlp => vec![ModelKind::Mlp],
            SweepKind::Both => vec![ModelKind::Qc, ModelKind::Mlp],
        }
    }
}

/// One hyperparameter setting: training-set size, parameter budget, epochs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepTuple {
    pub n: usize,
    pub n_params: usize,
    pub epochs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub tuples: Vec<SweepTuple>,
    pub seeds: Vec<u64>,
    pub kind: SweepKind,
    pub encoder: EncoderSpec,
    pub measurements: MeasurementSet,
    /// Fraction of the dataset reserved for the training pool; the rest is
    /// the test set.
    pub train_ratio: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub loss: LossConfig,
}

impl SweepPlan {
    /// Uniform grid over circuit depth: `N_t = 3·N·L` for each `L`.
    pub fn layer_grid(n_qubits: usize, layers: impl IntoIterator<Item = usize>, n: usize, epochs: usize) -> Vec<SweepTuple> {
        layers
            .into_iter()
            .map(|l| SweepTuple { n, n_params: AnsatzSpec::param_count(n_qubits, l), epochs })
            .collect()
    }

    /// Checks that do not need the dataset. Plans with fewer than three
    /// tuples are allowed; the fit then drops to a lower degree.
    pub fn validate(&self) -> Result<()> {
        if self.tuples.is_empty() {
            return invalid("sweep needs at least one tuple");
        }
        if self.seeds.is_empty() {
            return invalid("sweep needs at least one seed");
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return invalid(format!("train ratio {} outside (0, 1)", self.train_ratio));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.batch_size == 0 {
            return invalid("batch size must be positive");
        }
        for t in &self.tuples {
            if t.n == 0 {
                return invalid("tuple with n = 0");
            }
            if matches!(self.kind, SweepKind::Qc | SweepKind::Both) {
                let layers = AnsatzSpec::layers_for(self.encoder.n_qubits, t.n_params)?;
                if layers == 0 {
                    return invalid("a quantum tuple needs at least one layer");
                }
            }
        }
        Ok(())
    }
}

/// One finished training run, keyed by its position in the plan.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub tuple: usize,
    pub seed: u64,
    pub model: ModelKind,
    pub record: TrainRecord,
}

fn mlp_hidden(input: usize, k: usize, n_params: usize) -> Result<usize> {
    let smallest = MlpSpec::param_count(input, 1, k);
    if n_params < smallest {
        return invalid(format!("{n_params} parameters is below the smallest MLP ({smallest})"));
    }
    Ok(MlpSpec::hidden_for(input, k, n_params))
}

/// Trains every (tuple, seed, model) combination. Seed `s` drives the
/// train/test split, the subsample and the initialization. Runs execute in
/// parallel; the output order follows the plan.
pub fn run_sweep(plan: &SweepPlan, dataset: &Dataset) -> Result<Vec<SweepRun>> {
    plan.validate()?;
    dataset.validate()?;
    let (k, input) = (dataset.n_classes, dataset.feature_width());
    let mut jobs = Vec::new();
    for (ti, t) in plan.tuples.iter().enumerate() {
        for &seed in &plan.seeds {
            for model in plan.kind.models() {
                if model == ModelKind::Mlp {
                    mlp_hidden(input, k, t.n_params)?;
                }
                jobs.push((ti, seed, model));
            }
        }
    }
    // Data shortfalls surface before any training starts.
    for &seed in &plan.seeds {
        let (pool, _) = split(dataset, plan.train_ratio, seed)?;
        let largest = plan.tuples.iter().map(|t| t.n).max().unwrap_or(0);
        if largest > pool.len() {
            return Err(Error::InsufficientData(format!(
                "tuple asks for {largest} training examples, the pool holds {}",
                pool.len()
            )));
        }
    }

    jobs.into_par_iter()
        .map(|(ti, seed, model)| {
            let t = plan.tuples[ti];
            let (pool, test) = split(dataset, plan.train_ratio, seed)?;
            let train = if t.n == pool.len() { pool } else { balanced_subsample(&pool, t.n, seed)? };
            let record = match model {
                ModelKind::Qc => {
                    let setup = QcSetup {
                        encoder: plan.encoder,
                        measurements: plan.measurements.clone(),
                        n_layers: AnsatzSpec::layers_for(plan.encoder.n_qubits, t.n_params)?,
                    };
                    let cfg = TrainConfig {
                        epochs: t.epochs,
                        learning_rate: plan.learning_rate,
                        batch_size: plan.batch_size,
                        seed,
                        loss: plan.loss,
                    };
                    train_qc(&train, &test, &setup, &cfg)?
                }
                ModelKind::Mlp => {
                    let cfg = MlpConfig {
                        hidden: mlp_hidden(input, k, t.n_params)?,
                        epochs: t.epochs,
                        learning_rate: plan.learning_rate,
                        batch_size: plan.batch_size,
                        seed,
                    };
                    train_mlp(&train, &test, &cfg)?
                }
            };
            Ok(SweepRun { tuple: ti, seed, model, record })
        })
        .collect()
}

/// Which test loss of a run enters the curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LossStat {
    #[default]
    Final,
    TailMean { window: usize },
}

impl LossStat {
    pub fn of(self, r: &TrainRecord) -> f64 {
        match self {
            LossStat::Final => r.final_metrics().test_loss,
            LossStat::TailMean { window } => r.tail_test_loss(window),
        }
    }
}

/// Seed-averaged loss at one parameter count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_params: usize,
    pub mean_loss: f64,
    /// Sample standard deviation across seeds; 0 for a single seed.
    pub std: f64,
    pub runs: usize,
}

/// Averages the runs of one model per tuple, in tuple order. The parameter
/// count is the one actually trained.
pub fn curve_points(runs: &[SweepRun], model: ModelKind, stat: LossStat) -> Vec<CurvePoint> {
    let mut tuples: Vec<usize> = runs.iter().filter(|r| r.model == model).map(|r| r.tuple).collect();
    tuples.sort_unstable();
    tuples.dedup();
    tuples
        .into_iter()
        .map(|ti| {
            let mut group: Vec<&SweepRun> = runs.iter().filter(|r| r.model == model && r.tuple == ti).collect();
            group.sort_by_key(|r| r.seed);
            let vals: Vec<f64> = group.iter().map(|r| stat.of(&r.record)).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            CurvePoint { n_params: group[0].record.info.n_params, mean_loss: mean, std, runs: vals.len() }
        })
        .collect()
}

/// Least-squares polynomial in `t = (x − center) / half_width`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub degree: usize,
    pub center: f64,
    pub half_width: f64,
    /// Ascending powers of `t`.
    pub scaled_coefficients: Vec<f64>,
    /// Ascending powers of `x`.
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

impl Polynomial {
    pub fn to_scaled(&self, x: f64) -> f64 {
        (x - self.center) / self.half_width
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.scaled_coefficients, self.to_scaled(x))
    }
}

/// `Σ_j c_j ((x − a)/h)^j` re-expanded in powers of `x`.
fn unscale(c: &[f64], a: f64, h: f64) -> Vec<f64> {
    let mut out = vec![0.0; c.len()];
    // power holds the coefficients of ((x − a)/h)^j
    let mut power = vec![1.0];
    for &cj in c {
        for (i, p) in power.iter().enumerate() {
            out[i] += cj * p;
        }
        let mut next = vec![0.0; power.len() + 1];
        for (i, p) in power.iter().enumerate() {
            next[i + 1] += p / h;
            next[i] -= p * a / h;
        }
        power = next;
    }
    out
}

/// Least squares by the normal equations on x mapped affinely onto [−1, 1].
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Polynomial> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < degree + 1 {
        return Err(Error::InsufficientData(format!(
            "degree {degree} needs {} points, got {}",
            degree + 1,
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return invalid("non-finite point");
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let half_width = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let ts: Vec<f64> = xs.iter().map(|x| (x - center) / half_width).collect();

    let mut distinct = ts.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct.len() < degree + 1 {
        return Err(Error::RankDeficient(format!(
            "{} distinct x values for degree {degree}",
            distinct.len()
        )));
    }

    let v = DMatrix::from_fn(ts.len(), degree + 1, |i, j| ts[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let chol = (v.transpose() * &v)
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("normal matrix is not positive definite".into()))?;
    let c = chol.solve(&(v.transpose() * &y));
    let scaled: Vec<f64> = c.iter().copied().collect();
    let rss = ts.iter().zip(ys).map(|(&t, &y)| (y - horner(&scaled, t)).powi(2)).sum();
    Ok(Polynomial {
        degree,
        center,
        half_width,
        coefficients: unscale(&scaled, center, half_width),
        scaled_coefficients: scaled,
        rss,
    })
}

/// Fits each candidate degree and keeps the smallest whose residual is within
/// 5% of the best. Degrees the data cannot support are skipped.
pub fn select_degree(xs: &[f64], ys: &[f64], degrees: &[usize]) -> Result<(Polynomial, Vec<(usize, f64)>)> {
    let mut fits = Vec::new();
    for &d in degrees {
        match polyfit(xs, ys, d) {
            Ok(p) => fits.push(p),
            Err(Error::InsufficientData(_) | Error::RankDeficient(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if fits.is_empty() {
        return Err(Error::InsufficientData("no candidate degree fits these points".into()));
    }
    let best = fits.iter().map(|p| p.rss).fold(f64::INFINITY, f64::min);
    let table = fits.iter().map(|p| (p.degree, p.rss)).collect();
    fits.sort_by_key(|p| p.degree);
    let chosen = fits.into_iter().find(|p| p.rss <= best * 1.05 + 1e-15).expect("best fit qualifies");
    Ok((chosen, table))
}

/// Real roots of `Σ c_j t^j` from the eigenvalues of its companion matrix.
pub fn real_roots(c: &[f64], imag_tol: f64) -> Vec<f64> {
    let scale = c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-14 * scale) {
        c.pop();
    }
    if c.len() < 2 {
        return Vec::new();
    }
    let m = c.len() - 1;
    let lead = c[m];
    let companion = DMatrix::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() < imag_tol)
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub n_params: f64,
    pub value: f64,
    /// True when the global minimum over the domain sits strictly inside.
    pub interior: bool,
    /// Set when the minimum is an endpoint of the domain.
    pub boundary: Option<Endpoint>,
}

/// Global minimum of the polynomial over `[x_min, x_max]`, comparing the
/// critical points inside the domain with both endpoints.
pub fn find_basin(p: &Polynomial, domain: (f64, f64)) -> Basin {
    let (lo, hi) = domain;
    let deriv: Vec<f64> = p.scaled_coefficients.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect();
    let mut best = (lo, p.eval(lo), Some(Endpoint::Min));
    let hi_v = p.eval(hi);
    if hi_v < best.1 {
        best = (hi, hi_v, Some(Endpoint::Max));
    }
    let span = (hi - lo).abs().max(f64::MIN_POSITIVE);
    for t in real_roots(&deriv, 1e-8) {
        let x = p.center + t * p.half_width;
        if (x - lo) / span > 1e-9 && (hi - x) / span > 1e-9 {
            let v = p.eval(x);
            if v < best.1 {
                best = (x, v, None);
            }
        }
    }
    Basin { n_params: best.0, value: best.1, interior: best.2.is_none(), boundary: best.2 }
}

/// How the curve degree is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DegreeRule {
    Fixed { degree: usize },
    Select { candidates: Vec<usize> },
}

impl Default for DegreeRule {
    fn default() -> Self {
        DegreeRule::Fixed { degree: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskCurveFit {
    pub model: ModelKind,
    pub loss_stat: LossStat,
    pub points: Vec<CurvePoint>,
    pub polynomial: Polynomial,
    /// Residual of every degree that was tried.
    pub degree_residuals: Vec<(usize, f64)>,
    pub basin: Basin,
}

impl RiskCurveFit {
    /// Fits the points under `rule`. With too few points the degree drops to
    /// `points − 1`, so a single point yields a constant and a boundary basin.
    pub fn fit(model: ModelKind, loss_stat: LossStat, points: Vec<CurvePoint>, rule: &DegreeRule) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InsufficientData("no curve points".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.n_params as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean_loss).collect();
        let cap = points.len() - 1;
        let (polynomial, degree_residuals) = match rule {
            DegreeRule::Fixed { degree } => {
                let p = polyfit(&xs, &ys, (*degree).min(cap))?;
                let r = vec![(p.degree, p.rss)];
                (p, r)
            }
            DegreeRule::Select { candidates } => {
                let mut c: Vec<usize> = candidates.iter().map(|&d| d.min(cap)).collect();
                c.sort_unstable();
                c.dedup();
                select_degree(&xs, &ys, &c)?
            }
        };
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let basin = find_basin(&polynomial, (lo, hi));
        Ok(RiskCurveFit { model, loss_stat, points, polynomial, degree_residuals, basin })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rows `series,n_params,mean_loss,std,fitted`: one `point` row per
    /// tuple, then 100 evenly spaced `grid` rows of the fitted curve.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["series", "n_params", "mean_loss", "std", "fitted"])?;
        for p in &self.points {
            let x = p.n_params as f64;
            w.write_record(["point".into(), x.to_string(), p.mean_loss.to_string(), p.std.to_string(), self.polynomial.eval(x).to_string()])?;
        }
        let lo = self.points.iter().map(|p| p.n_params).min().unwrap_or(0) as f64;
        let hi = self.points.iter().map(|p| p.n_params).max().unwrap_or(0) as f64;
        for i in 0..100 {
            let x = lo + (hi - lo) * i as f64 / 99.0;
            w.write_record(["grid".into(), x.to_string(), String::new(), String::new(), self.polynomial.eval(x).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
