//! The five subcommands. Each reads a validated configuration, runs the
//! library, and writes its artifacts into the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qcrisk::classifier::{train_mlp, train_qc, ClassifierDoc, MlpConfig, MlpSpec, QcSetup, QuantumClassifier, TrainConfig, TrainRecord};
use qcrisk::concentration::{verify_ansatz_concentration, verify_encoder_concentration, ConcentrationTrial, TrialPlan};
use qcrisk::data::{gen_parity, load_idx, preprocess_images, split, Dataset};
use qcrisk::genbound::{estimate_t_d, lipschitz_and_xi_for, BoundInputs, BoundReport};
use qcrisk::geometry::{analyze, GeometryReport};
use qcrisk::linalg::{kron, Axis, CMatrix};
use qcrisk::measurements::{basis_measurements, pauli_measurements, qubit_sic_povm, simplex_etf_operators, MeasurementSet};
use qcrisk::quantum::{AnsatzSpec, EncoderSpec};
use qcrisk::riskcurve::{curve_points, run_sweep, DegreeRule, LossStat, RiskCurveFit, SweepPlan, SweepTuple};

use crate::config::{DatasetKind, EncoderChoice, ExperimentConfig, LossStatChoice, MeasurementChoice, Observable};

/// Failure classes mapped onto exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl From<qcrisk::Error> for CliError {
    fn from(e: qcrisk::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Progress messages on stderr, silenced by `--quiet`.
#[derive(Clone, Copy)]
pub struct Log {
    pub quiet: bool,
}

impl Log {
    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub struct Context {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub log: Log,
}

impl Context {
    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        self.log.info(format!("wrote {}", self.out_dir.join(name).display()));
        Ok(())
    }

    fn write_with(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> qcrisk::Result<()>) -> CliResult<()> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        self.log.info(format!("wrote {}", self.out_dir.join(name).display()));
        Ok(())
    }
}

fn load_dataset(cfg: &ExperimentConfig) -> CliResult<Dataset> {
    let d = &cfg.dataset;
    Ok(match d.kind {
        DatasetKind::Parity => gen_parity(d.bits)?,
        DatasetKind::Idx => {
            let raw = load_idx(d.images.as_ref().expect("validated"), d.labels.as_ref().expect("validated"))?;
            preprocess_images(&raw, d.classes, d.per_class)?
        }
    })
}

fn encoder_for(cfg: &ExperimentConfig, ds: &Dataset) -> CliResult<EncoderSpec> {
    let width = ds.feature_width();
    Ok(match cfg.encoder_choice() {
        EncoderChoice::Basis => EncoderSpec::basis(width),
        EncoderChoice::Amplitude => {
            let n = width.trailing_zeros() as usize;
            if let Some(q) = cfg.circuit.qubits {
                if q != n {
                    return Err(CliError::Validation(format!(
                        "circuit.qubits: {q} qubits cannot hold vectors of length {width}"
                    )));
                }
            }
            EncoderSpec::amplitude(n, None)
        }
    })
}

fn measurements_for(cfg: &ExperimentConfig) -> CliResult<MeasurementSet> {
    let k = cfg.dataset.n_classes();
    let d = cfg.feature_qubits();
    Ok(match cfg.circuit.measurement {
        MeasurementChoice::Basis => basis_measurements(k, d)?,
        MeasurementChoice::SimplexEtf => simplex_etf_operators(k, d)?,
        MeasurementChoice::Pauli => pauli_measurements(),
        MeasurementChoice::Sic => qubit_sic_povm(),
    })
}

fn split_for(cfg: &ExperimentConfig, ds: &Dataset, seed: u64) -> CliResult<(Dataset, Dataset)> {
    Ok(split(ds, cfg.dataset.train_ratio, cfg.dataset.seed.unwrap_or(seed))?)
}

fn feature_states(qc: &QuantumClassifier, ds: &Dataset) -> CliResult<Vec<CMatrix>> {
    Ok(ds
        .examples
        .iter()
        .map(|e| qc.feature_state(&e.features).map(|f| f.into_matrix()))
        .collect::<qcrisk::Result<_>>()?)
}

#[derive(Serialize)]
struct GeometryEntry {
    seed: u64,
    /// Which examples the report covers.
    split: &'static str,
    report: GeometryReport,
    /// Bloch vectors of every training feature state after each epoch, for
    /// one-qubit feature states. Entry `i` follows training example `i`.
    bloch_trajectory: Vec<Option<Vec<[f64; 3]>>>,
}

pub fn train(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let ds = load_dataset(cfg)?;
    let setup = QcSetup { encoder: encoder_for(cfg, &ds)?, measurements: measurements_for(cfg)?, n_layers: cfg.circuit.layers };
    let t = &cfg.training;
    let models = t.model.models();
    let mut records: Vec<TrainRecord> = Vec::new();
    let mut geometry = Vec::new();
    let mut first_model: Option<ClassifierDoc> = None;
    for &seed in &t.seeds {
        let (train, test) = split_for(cfg, &ds, seed)?;
        for &m in &models {
            let rec = match m {
                qcrisk::riskcurve::ModelKind::Qc => {
                    let tc = TrainConfig {
                        epochs: t.epochs,
                        learning_rate: t.learning_rate,
                        batch_size: t.batch_size,
                        seed,
                        loss: t.loss_config(),
                    };
                    let rec = train_qc(&train, &test, &setup, &tc)?;
                    let qc = setup.classifier(rec.final_params.clone())?;
                    let states = feature_states(&qc, &train)?;
                    let report = analyze(&states, &train.labels(), qc.k(), &qc.measurements.operators)?;
                    geometry.push(GeometryEntry {
                        seed,
                        split: "train",
                        report,
                        bloch_trajectory: rec.epochs.iter().map(|e| e.bloch.clone()).collect(),
                    });
                    let doc = qc.to_doc();
                    if t.seeds.len() > 1 {
                        ctx.write_json(&format!("model_seed{seed}.json"), &doc)?;
                    }
                    first_model.get_or_insert(doc);
                    rec
                }
                qcrisk::riskcurve::ModelKind::Mlp => {
                    let hidden = t.mlp_hidden.unwrap_or_else(|| {
                        MlpSpec::hidden_for(ds.feature_width(), ds.n_classes, setup.n_params())
                    });
                    let mc = MlpConfig { hidden, epochs: t.epochs, learning_rate: t.learning_rate, batch_size: t.batch_size, seed };
                    train_mlp(&train, &test, &mc)?
                }
            };
            let f = rec.final_metrics();
            ctx.log.info(format!(
                "{} seed {seed}: train loss {:.3e}, test loss {:.3e}, accuracy {:.3}/{:.3}",
                rec.info.model, f.train_loss, f.test_loss, f.train_accuracy, f.test_accuracy
            ));
            records.push(rec);
        }
    }
    ctx.write_with("train_record.jsonl", |w| records.iter().try_for_each(|r| r.write_jsonl(&mut *w)))?;
    ctx.write_with("summary.csv", |w| TrainRecord::write_summary_csv(&records, w))?;
    ctx.write_json("geometry.json", &geometry)?;
    if let Some(doc) = first_model {
        ctx.write_json("model.json", &doc)?;
    }
    Ok(())
}

pub fn riskcurve(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let ds = load_dataset(cfg)?;
    let encoder = encoder_for(cfg, &ds)?;
    let s = &cfg.sweep;
    let t = &cfg.training;
    let n = match s.n {
        Some(n) => n,
        None => split_for(cfg, &ds, t.seeds[0])?.0.len(),
    };
    let epochs = s.epochs.unwrap_or(t.epochs);
    let tuples = if s.n_params.is_empty() {
        SweepPlan::layer_grid(encoder.n_qubits, s.layers.iter().copied(), n, epochs)
    } else {
        s.n_params.iter().map(|&p| SweepTuple { n, n_params: p, epochs }).collect()
    };
    let plan = SweepPlan {
        tuples,
        seeds: t.seeds.clone(),
        kind: s.kind,
        encoder,
        measurements: measurements_for(cfg)?,
        train_ratio: cfg.dataset.train_ratio,
        learning_rate: t.learning_rate,
        batch_size: t.batch_size,
        loss: t.loss_config(),
    };
    plan.validate().map_err(|e| CliError::Validation(format!("sweep: {e}")))?;
    ctx.log.info(format!("sweeping {} tuples x {} seeds", plan.tuples.len(), plan.seeds.len()));
    let runs = run_sweep(&plan, &ds)?;
    let records: Vec<TrainRecord> = runs.iter().map(|r| r.record.clone()).collect();
    ctx.write_with("sweep_records.jsonl", |w| records.iter().try_for_each(|r| r.write_jsonl(&mut *w)))?;
    ctx.write_with("summary.csv", |w| TrainRecord::write_summary_csv(&records, w))?;

    let rule = if s.select_degree {
        DegreeRule::Select { candidates: vec![2, 3, 4] }
    } else {
        DegreeRule::Fixed { degree: s.degree }
    };
    let tail = LossStat::TailMean { window: s.tail_window };
    let (primary, alternate, alt_name) = match s.loss_stat {
        LossStatChoice::Final => (LossStat::Final, tail, "tail_mean"),
        LossStatChoice::TailMean => (tail, LossStat::Final, "final"),
    };
    for model in plan.kind.models() {
        let name = model.as_str();
        let fit = RiskCurveFit::fit(model, primary, curve_points(&runs, model, primary), &rule)?;
        let b = fit.basin;
        ctx.log.info(format!(
            "{name}: degree {} fit, minimum at N_t = {:.1} ({})",
            fit.polynomial.degree,
            b.n_params,
            if b.interior { "interior" } else { "boundary" }
        ));
        ctx.write_json(&format!("riskcurve_{name}.json"), &fit)?;
        ctx.write_with(&format!("riskcurve_{name}.csv"), |w| fit.write_csv(w))?;
        let alt = RiskCurveFit::fit(model, alternate, curve_points(&runs, model, alternate), &rule)?;
        ctx.write_json(&format!("riskcurve_{name}_{alt_name}.json"), &alt)?;
        ctx.write_with(&format!("riskcurve_{name}_{alt_name}.csv"), |w| alt.write_csv(w))?;
    }
    Ok(())
}

fn load_model(path: &Path) -> CliResult<QuantumClassifier> {
    let text = std::fs::read_to_string(path)?;
    let doc: ClassifierDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: not a saved classifier: {e}", path.display())))?;
    Ok(QuantumClassifier::from_doc(&doc)?)
}

#[derive(Serialize)]
struct DiagnoseReport {
    /// Path of the saved classifier, or `random` with its seed.
    source: String,
    examples: usize,
    report: GeometryReport,
}

pub fn diagnose(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let ds = load_dataset(cfg)?;
    let (qc, source) = match &cfg.diagnose.model {
        Some(p) => (load_model(p)?, p.display().to_string()),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.diagnose.seed);
            let encoder = encoder_for(cfg, &ds)?;
            let ansatz = AnsatzSpec::random(encoder.n_qubits, cfg.circuit.layers, &mut rng)?;
            (QuantumClassifier::new(encoder, ansatz, measurements_for(cfg)?)?, format!("random (seed {})", cfg.diagnose.seed))
        }
    };
    if qc.k() != ds.n_classes {
        return Err(CliError::Validation(format!(
            "diagnose.model: classifier has {} outputs, dataset has {} classes",
            qc.k(),
            ds.n_classes
        )));
    }
    let states = feature_states(&qc, &ds)?;
    let report = analyze(&states, &ds.labels(), qc.k(), &qc.measurements.operators)?;
    ctx.log.info(format!("M1 per class {:.3?}", report.m1_per_class));
    ctx.log.info(format!("alignment {:.3?}", report.alignment_matrix));
    ctx.write_json("geometry.json", &DiagnoseReport { source, examples: ds.len(), report })
}

pub fn concentrate(ctx: &Context) -> CliResult<()> {
    let c = &ctx.config.concentration;
    let o = match c.observable {
        Observable::Z => Axis::Z.matrix(),
        Observable::Zz => kron(&Axis::Z.matrix(), &Axis::Z.matrix()),
    };
    let mut trials: Vec<ConcentrationTrial> = Vec::new();
    for &n in &c.qubits {
        let plan = TrialPlan { n_qubits: n, depth: c.depth.unwrap_or(2 * n), trials: c.trials, delta: c.delta, seed: c.seed };
        for t in [verify_encoder_concentration(&plan, c.pair_mode)?, verify_ansatz_concentration(&plan, &o, None)?] {
            ctx.log.info(format!(
                "N = {n} {}: mean {:.5} ± {:.5} around {:.5}, violation rate {:.4} (delta {})",
                t.quantity.as_str(),
                t.estimate.mean,
                t.estimate.std_error,
                t.center,
                t.violation_rate,
                t.delta
            ));
            trials.push(t);
        }
    }
    ctx.write_with("concentration.csv", |w| ConcentrationTrial::write_csv(&trials, w))
}

pub fn bound(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let b = &cfg.bound;
    let ds = load_dataset(cfg)?;
    let encoder = encoder_for(cfg, &ds)?;
    let (train, test) = split_for(cfg, &ds, cfg.training.seeds[0])?;
    let k = ds.n_classes;
    let (c2, l1, xi, t_d) = match &b.model {
        Some(p) => {
            let qc = load_model(p)?;
            let (l1, xi) = lipschitz_and_xi_for(&qc, &[&train, &test], cfg.training.etf_label_mode)?;
            let states = feature_states(&qc, &train)?;
            let part = estimate_t_d(&states, &train.labels(), b.partition_epsilon.unwrap_or(b.epsilon))?;
            ctx.log.info(format!("{} occupied cells over {} training examples", part.occupied, train.len()));
            (qc.measurements.norm_bound, b.l1.unwrap_or(l1), b.xi.unwrap_or(xi), b.t_d.unwrap_or(part.occupied))
        }
        None => {
            // Without a model: |h_k| ≤ C2 and unit-norm targets give
            // ‖h − y‖ ≤ √K·C2 + 1, and every example may sit in its own cell.
            let c2 = measurements_for(cfg)?.norm_bound;
            let l1 = b.l1.unwrap_or((k as f64).sqrt() * c2 + 1.0);
            (c2, l1, b.xi.unwrap_or(0.5 * l1 * l1), b.t_d.unwrap_or(train.len()))
        }
    };
    let g = encoder.gate_counts;
    let inputs = BoundInputs {
        n: train.len(),
        k,
        n_ge: g.tunable,
        n_g: g.total,
        m: g.max_arity as u32,
        epsilon: b.epsilon,
        delta: b.delta,
        l1,
        c2,
        xi,
        t_d,
        channel_factor: b.channel_factor,
    };
    let report = BoundReport::new(inputs).map_err(|e| CliError::Validation(format!("bound: {e}")))?;
    ctx.log.info(format!(
        "bound {:.4} = {:.4} + {:.4} + {:.4}",
        report.terms.total, report.terms.robustness, report.terms.sqrt_term, report.terms.linear_term
    ));
    ctx.write_with("bound.csv", |w| BoundReport::write_csv(&[report], w))
}
