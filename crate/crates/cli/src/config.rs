//! Experiment configuration: one TOML file per run, every section optional,
//! validated up front with dotted field paths in the messages.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qcrisk::classifier::{LossConfig, LossVariant};
use qcrisk::concentration::PairMode;
use qcrisk::riskcurve::SweepKind;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub circuit: CircuitSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub bound: BoundSection,
    #[serde(default)]
    pub concentration: ConcentrationSection,
    #[serde(default)]
    pub diagnose: DiagnoseSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    #[default]
    Parity,
    Idx,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    /// Parity input width.
    pub bits: usize,
    pub images: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub classes: usize,
    pub per_class: usize,
    pub train_ratio: f64,
    /// Split seed; each run's own seed when absent.
    pub seed: Option<u64>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            kind: DatasetKind::Parity,
            bits: 6,
            images: None,
            labels: None,
            classes: 9,
            per_class: 20,
            train_ratio: 0.75,
            seed: None,
        }
    }
}

impl DatasetSection {
    pub fn n_classes(&self) -> usize {
        match self.kind {
            DatasetKind::Parity => 2,
            DatasetKind::Idx => self.classes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderChoice {
    Basis,
    Amplitude,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementChoice {
    #[default]
    Basis,
    Pauli,
    SimplexEtf,
    Sic,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    /// Register width; follows the dataset when absent.
    pub qubits: Option<usize>,
    pub layers: usize,
    /// Basis for parity and amplitude for images when absent.
    pub encoder: Option<EncoderChoice>,
    pub measurement: MeasurementChoice,
    /// Measured qubits `D`; the smallest that fits the classes when absent.
    pub feature_qubits: Option<usize>,
}

impl Default for CircuitSection {
    fn default() -> Self {
        CircuitSection { qubits: None, layers: 3, encoder: None, measurement: MeasurementChoice::Basis, feature_qubits: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub model: SweepKind,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub loss: LossVariant,
    pub lambda_rho: f64,
    pub lambda_o: f64,
    pub etf_label_mode: bool,
    /// MLP width; matched to the circuit's parameter count when absent.
    pub mlp_hidden: Option<usize>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            model: SweepKind::Qc,
            epochs: 50,
            learning_rate: 0.5,
            batch_size: 4,
            seeds: vec![0],
            loss: LossVariant::PlainMse,
            lambda_rho: 0.0,
            lambda_o: 0.0,
            etf_label_mode: false,
            mlp_hidden: None,
        }
    }
}

impl TrainingSection {
    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            variant: self.loss,
            lambda_rho: self.lambda_rho,
            lambda_o: self.lambda_o,
            etf_label_mode: self.etf_label_mode,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossStatChoice {
    #[default]
    Final,
    TailMean,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Depth grid; each entry becomes `N_t = 3·N·L`.
    pub layers: Vec<usize>,
    /// Explicit parameter counts, used instead of `layers` when non-empty.
    pub n_params: Vec<usize>,
    /// Training-set size per tuple; the whole training pool when absent.
    pub n: Option<usize>,
    /// Epochs per tuple; `training.epochs` when absent.
    pub epochs: Option<usize>,
    pub kind: SweepKind,
    pub degree: usize,
    /// Try degrees 2 to 4 and keep the most parsimonious adequate one.
    pub select_degree: bool,
    pub loss_stat: LossStatChoice,
    pub tail_window: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            layers: (1..=7).collect(),
            n_params: Vec::new(),
            n: None,
            epochs: None,
            kind: SweepKind::Qc,
            degree: 3,
            select_degree: false,
            loss_stat: LossStatChoice::Final,
            tail_window: 5,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    pub epsilon: f64,
    pub delta: f64,
    /// Trained classifier; supplies L1, ξ and T_D when given.
    pub model: Option<PathBuf>,
    pub t_d: Option<usize>,
    pub l1: Option<f64>,
    pub xi: Option<f64>,
    pub channel_factor: f64,
    /// Cell radius for counting T_D from a model; `epsilon` when absent.
    pub partition_epsilon: Option<f64>,
}

impl Default for BoundSection {
    fn default() -> Self {
        BoundSection {
            epsilon: 0.01,
            delta: 0.05,
            model: None,
            t_d: None,
            l1: None,
            xi: None,
            channel_factor: 1.0,
            partition_epsilon: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    /// Pauli Z on the first qubit.
    #[default]
    Z,
    /// Z⊗Z on the first two qubits.
    Zz,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcentrationSection {
    pub qubits: Vec<usize>,
    /// Circuit depth; `2N` when absent.
    pub depth: Option<usize>,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
    pub observable: Observable,
    pub pair_mode: PairMode,
}

impl Default for ConcentrationSection {
    fn default() -> Self {
        ConcentrationSection {
            qubits: vec![4],
            depth: None,
            trials: 2000,
            delta: 0.05,
            seed: 0,
            observable: Observable::Z,
            pair_mode: PairMode::BothRandom,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseSection {
    /// Saved classifier; a random one from `seed` when absent.
    pub model: Option<PathBuf>,
    pub seed: u64,
}

/// A rejected field and the reason.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Default)]
struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(FieldError { path: path.into(), message: message.into() });
    }

    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(path, format!("must be positive, got {v}"));
        }
    }

    fn unit_open(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v < 1.0) {
            self.push(path, format!("must lie in (0, 1), got {v}"));
        }
    }

    fn existing(&mut self, path: &str, p: &Option<PathBuf>, required: bool) {
        match p {
            Some(p) if !p.exists() => self.push(path, format!("file {} does not exist", p.display())),
            None if required => self.push(path, "is required"),
            _ => {}
        }
    }
}

/// Which command the configuration is checked for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Train,
    RiskCurve,
    Diagnose,
    Concentrate,
    Bound,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, FieldError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FieldError { path: "--config".into(), message: format!("{}: {e}", path.display()) })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, FieldError> {
        toml::from_str(text).map_err(|e| FieldError { path: "config".into(), message: e.to_string().trim().to_string() })
    }

    /// The command-line seed replaces every seed in the file.
    pub fn override_seed(&mut self, seed: u64) {
        self.training.seeds = vec![seed];
        self.dataset.seed = Some(seed);
        self.concentration.seed = seed;
        self.diagnose.seed = seed;
    }

    /// Checks every field the command will read, before anything runs.
    pub fn validate(&self, purpose: Purpose) -> Result<(), Vec<FieldError>> {
        let mut e = Errors::default();
        let needs_data = purpose != Purpose::Concentrate;
        if needs_data {
            self.validate_data(&mut e);
        }
        if matches!(purpose, Purpose::Train | Purpose::RiskCurve | Purpose::Diagnose | Purpose::Bound) {
            self.validate_circuit(&mut e);
        }
        if matches!(purpose, Purpose::Train | Purpose::RiskCurve) {
            self.validate_training(&mut e);
        }
        match purpose {
            Purpose::RiskCurve => self.validate_sweep(&mut e),
            Purpose::Bound => self.validate_bound(&mut e),
            Purpose::Concentrate => self.validate_concentration(&mut e),
            Purpose::Diagnose => e.existing("diagnose.model", &self.diagnose.model, false),
            Purpose::Train => {}
        }
        if e.0.is_empty() {
            Ok(())
        } else {
            Err(e.0)
        }
    }

    fn validate_data(&self, e: &mut Errors) {
        let d = &self.dataset;
        e.unit_open("dataset.train_ratio", d.train_ratio);
        match d.kind {
            DatasetKind::Parity => {
                if !(1..=24).contains(&d.bits) {
                    e.push("dataset.bits", format!("must lie in 1..=24, got {}", d.bits));
                }
            }
            DatasetKind::Idx => {
                e.existing("dataset.images", &d.images, true);
                e.existing("dataset.labels", &d.labels, true);
                if !(2..=10).contains(&d.classes) {
                    e.push("dataset.classes", format!("must lie in 2..=10, got {}", d.classes));
                }
                if d.per_class == 0 {
                    e.push("dataset.per_class", "must be positive");
                }
            }
        }
    }

    /// Register width implied by the dataset, before any file is read.
    pub fn register_width(&self) -> Option<usize> {
        self.circuit.qubits.or(match self.dataset.kind {
            DatasetKind::Parity => Some(self.dataset.bits),
            DatasetKind::Idx => None,
        })
    }

    pub fn feature_qubits(&self) -> usize {
        let k = self.dataset.n_classes();
        self.circuit.feature_qubits.unwrap_or_else(|| match self.circuit.measurement {
            MeasurementChoice::Pauli => 2,
            MeasurementChoice::Sic => 1,
            _ => (usize::BITS - (k.max(2) - 1).leading_zeros()) as usize,
        })
    }

    pub fn encoder_choice(&self) -> EncoderChoice {
        self.circuit.encoder.unwrap_or(match self.dataset.kind {
            DatasetKind::Parity => EncoderChoice::Basis,
            DatasetKind::Idx => EncoderChoice::Amplitude,
        })
    }

    fn validate_circuit(&self, e: &mut Errors) {
        let c = &self.circuit;
        let k = self.dataset.n_classes();
        let d = self.feature_qubits();
        if c.layers == 0 {
            e.push("circuit.layers", "must be at least 1");
        }
        if let Some(n) = self.register_width() {
            if n == 0 || n > 16 {
                e.push("circuit.qubits", format!("must lie in 1..=16, got {n}"));
            }
            if d > n {
                e.push("circuit.feature_qubits", format!("{d} exceeds the {n}-qubit register"));
            }
            if self.dataset.kind == DatasetKind::Parity && n != self.dataset.bits && self.encoder_choice() == EncoderChoice::Basis {
                e.push("circuit.qubits", format!("basis encoding of {} bits needs {} qubits", self.dataset.bits, self.dataset.bits));
            }
        }
        if self.dataset.kind == DatasetKind::Parity && self.encoder_choice() == EncoderChoice::Amplitude {
            e.push("circuit.encoder", "parity bitstrings need the basis encoder");
        }
        if self.dataset.kind == DatasetKind::Idx && self.encoder_choice() == EncoderChoice::Basis {
            e.push("circuit.encoder", "image vectors need the amplitude encoder");
        }
        match c.measurement {
            MeasurementChoice::Basis => {
                if (1usize << d.min(20)) < k {
                    e.push("circuit.feature_qubits", format!("2^{d} outcomes cannot hold {k} classes"));
                }
            }
            MeasurementChoice::SimplexEtf => {
                if (1usize << d.min(20)) < k || k < 2 {
                    e.push("circuit.feature_qubits", format!("2^{d} dimensions cannot hold a {k}-vector simplex"));
                }
            }
            MeasurementChoice::Pauli => {
                if k != 9 || d != 2 {
                    e.push("circuit.measurement", format!("the Pauli set has 9 operators on 2 qubits; dataset has {k} classes, D = {d}"));
                }
            }
            MeasurementChoice::Sic => {
                if k != 4 || d != 1 {
                    e.push("circuit.measurement", format!("the SIC set has 4 operators on 1 qubit; dataset has {k} classes, D = {d}"));
                }
            }
        }
    }

    fn validate_training(&self, e: &mut Errors) {
        let t = &self.training;
        if t.epochs > 100_000 {
            e.push("training.epochs", "is unreasonably large");
        }
        e.positive("training.learning_rate", t.learning_rate);
        if t.batch_size == 0 {
            e.push("training.batch_size", "must be positive");
        }
        if t.seeds.is_empty() {
            e.push("training.seeds", "needs at least one seed");
        }
        if !(t.lambda_rho >= 0.0 && t.lambda_o >= 0.0) {
            e.push("training.lambda_rho", "regularization weights must be non-negative");
        }
        if t.loss != LossVariant::PlainMse && t.lambda_rho == 0.0 {
            e.push("training.lambda_rho", "a regularized loss needs lambda_rho > 0");
        }
        if t.mlp_hidden == Some(0) {
            e.push("training.mlp_hidden", "must be positive");
        }
    }

    fn validate_sweep(&self, e: &mut Errors) {
        let s = &self.sweep;
        if s.layers.is_empty() && s.n_params.is_empty() {
            e.push("sweep.layers", "give a depth grid or sweep.n_params");
        }
        if s.layers.contains(&0) {
            e.push("sweep.layers", "depths must be at least 1");
        }
        if let Some(n) = self.register_width() {
            for &p in &s.n_params {
                if matches!(s.kind, SweepKind::Qc | SweepKind::Both) && (p == 0 || p % (3 * n) != 0) {
                    e.push("sweep.n_params", format!("{p} is not a positive multiple of 3·N = {}", 3 * n));
                }
            }
        }
        if s.n == Some(0) {
            e.push("sweep.n", "must be positive");
        }
        if s.degree > 8 {
            e.push("sweep.degree", "must be at most 8");
        }
        if s.tail_window == 0 {
            e.push("sweep.tail_window", "must be positive");
        }
    }

    fn validate_bound(&self, e: &mut Errors) {
        let b = &self.bound;
        e.positive("bound.epsilon", b.epsilon);
        e.unit_open("bound.delta", b.delta);
        if let Some(p) = b.partition_epsilon {
            e.positive("bound.partition_epsilon", p);
        }
        if !(b.channel_factor >= 0.0 && b.channel_factor.is_finite()) {
            e.push("bound.channel_factor", "must be finite and non-negative");
        }
        for (path, v) in [("bound.l1", b.l1), ("bound.xi", b.xi)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    e.push(path, "must be finite and non-negative");
                }
            }
        }
        if b.t_d == Some(0) {
            e.push("bound.t_d", "must be at least 1");
        }
        e.existing("bound.model", &b.model, false);
    }

    fn validate_concentration(&self, e: &mut Errors) {
        let c = &self.concentration;
        if c.qubits.is_empty() {
            e.push("concentration.qubits", "needs at least one register width");
        }
        let min_width = if c.observable == Observable::Zz { 2 } else { 1 };
        for &n in &c.qubits {
            if n < min_width || n > 14 {
                e.push("concentration.qubits", format!("{n} outside {min_width}..=14"));
            }
        }
        if c.depth == Some(0) {
            e.push("concentration.depth", "must be at least 1");
        }
        if c.trials < qcrisk::concentration::TrialPlan::MIN_TRIALS {
            e.push("concentration.trials", format!("must be at least {}", qcrisk::concentration::TrialPlan::MIN_TRIALS));
        }
        e.unit_open("concentration.delta", c.delta);
    }
}
