//! Datasets: the parity task, class-balanced splitting and IDX image ingestion.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Classifier input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Features {
    Bits(Vec<u8>),
    Amplitudes(Vec<f64>),
}

impl Features {
    /// Real-valued view used by classical baselines.
    pub fn to_real(&self) -> Vec<f64> {
        match self {
            Features::Bits(b) => b.iter().map(|&v| v as f64).collect(),
            Features::Amplitudes(a) => a.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Features::Bits(b) => b.len(),
            Features::Amplitudes(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Bitstring,
    Amplitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Features,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub n_classes: usize,
    pub kind: FeatureKind,
}

impl Dataset {
    /// Checks label range and feature shape.
    pub fn new(examples: Vec<Example>, n_classes: usize, kind: FeatureKind) -> Result<Self> {
        let ds = Dataset { examples, n_classes, kind };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.examples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let width = self.examples[0].features.len();
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.label >= self.n_classes {
                return invalid(format!("example {i} has label {} >= K = {}", ex.label, self.n_classes));
            }
            if ex.features.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: ex.features.len() });
            }
            match (&ex.features, self.kind) {
                (Features::Bits(_), FeatureKind::Bitstring) => {}
                (Features::Amplitudes(a), FeatureKind::Amplitude) => {
                    if !a.len().is_power_of_two() {
                        return invalid(format!("example {i}: length {} is not a power of two", a.len()));
                    }
                    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > 1e-9 {
                        return Err(Error::NotNormalized(norm));
                    }
                }
                _ => return invalid(format!("example {i} does not match dataset kind {:?}", self.kind)),
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn feature_width(&self) -> usize {
        self.examples.first().map_or(0, |e| e.features.len())
    }

    /// Example indices grouped by class, in dataset order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_classes];
        for (i, e) in self.examples.iter().enumerate() {
            groups[e.label].push(i);
        }
        groups
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.class_indices().iter().map(Vec::len).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
            n_classes: self.n_classes,
            kind: self.kind,
        }
    }

    /// Features flattened, label in the last column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let width = self.feature_width();
        let mut header: Vec<String> = (0..width).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for e in &self.examples {
            let mut row: Vec<String> = e.features.to_real().iter().map(|v| v.to_string()).collect();
            row.push(e.label.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// All `2^d` bitstrings of length `d`; label 1 when the number of zeros is even.
pub fn gen_parity(d: usize) -> Result<Dataset> {
    if d == 0 || d > 24 {
        return invalid(format!("parity bit length {d} outside 1..=24"));
    }
    let examples = (0..1usize << d)
        .map(|v| {
            let bits: Vec<u8> = (0..d).map(|j| ((v >> (d - 1 - j)) & 1) as u8).collect();
            let zeros = bits.iter().filter(|&&b| b == 0).count();
            Example { features: Features::Bits(bits), label: usize::from(zeros % 2 == 0) }
        })
        .collect();
    Dataset::new(examples, 2, FeatureKind::Bitstring)
}

/// Stratified shuffle split. Every class contributes the same number of
/// training examples, `min_k floor(ratio·|class k|)`; the rest go to test.
pub fn split(ds: &Dataset, train_ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return invalid(format!("train ratio {train_ratio} must lie in (0, 1)"));
    }
    let groups = ds.class_indices();
    if let Some(k) = groups.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(k));
    }
    let per_class = groups
        .iter()
        .map(|g| (train_ratio * g.len() as f64).floor() as usize)
        .min()
        .unwrap_or(0);
    if per_class == 0 {
        return Err(Error::InsufficientData(format!(
            "ratio {train_ratio} leaves no training example for the smallest class"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for g in groups {
        let mut g = g;
        g.shuffle(&mut rng);
        train.extend_from_slice(&g[..per_class]);
        test.extend_from_slice(&g[per_class..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Class-balanced random subset of `n` examples (`n` divisible by K).
pub fn balanced_subsample(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    let k = ds.n_classes;
    if n == 0 || n % k != 0 {
        return invalid(format!("subsample size {n} is not a positive multiple of K = {k}"));
    }
    let per_class = n / k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(n);
    for (c, g) in ds.class_indices().into_iter().enumerate() {
        if g.len() < per_class {
            return Err(Error::InsufficientData(format!(
                "class {c} has {} examples, {per_class} requested",
                g.len()
            )));
        }
        let mut g = g;
        g.shuffle(&mut rng);
        picked.extend_from_slice(&g[..per_class]);
    }
    picked.sort_unstable();
    Ok(ds.subset(&picked))
}

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Images and labels decoded from an IDX pair.
#[derive(Clone, Debug, PartialEq)]
pub struct RawImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
    pub labels: Vec<u8>,
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    let chunk = bytes
        .get(at..at + 4)
        .ok_or(Error::Truncated { needed: at + 4, found: bytes.len() })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("slice of length 4")))
}

/// Decodes an IDX3 image file (`0x00000803`).
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let magic = read_u32(bytes, 0)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic { expected: IDX_IMAGES_MAGIC, found: magic });
    }
    let count = read_u32(bytes, 4)? as usize;
    let rows = read_u32(bytes, 8)? as usize;
    let cols = read_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let needed = 16 + count * size;
    if bytes.len() < needed {
        return Err(Error::Truncated { needed, found: bytes.len() });
    }
    let images = bytes[16..needed].chunks(size.max(1)).take(count).map(<[u8]>::to_vec).collect();
    Ok((rows, cols, images))
}

/// Decodes an IDX1 label file (`0x00000801`).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32(bytes, 0)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic { expected: IDX_LABELS_MAGIC, found: magic });
    }
    let count = read_u32(bytes, 4)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(Error::Truncated { needed, found: bytes.len() });
    }
    Ok(bytes[8..needed].to_vec())
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<RawImages> {
    let (rows, cols, images) = parse_idx_images(&std::fs::read(images_path)?)?;
    let labels = parse_idx_labels(&std::fs::read(labels_path)?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch { images: images.len(), labels: labels.len() });
    }
    Ok(RawImages { rows, cols, images, labels })
}

pub fn encode_idx_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IDX_IMAGES_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        out.extend_from_slice(img);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// First `per_class` images of each class `0..keep_classes`, flattened,
/// scaled to `[0,1]`, zero-padded to a power of two and normalized to unit
/// Euclidean norm. Output is ordered by class, then file order.
pub fn preprocess_images(raw: &RawImages, keep_classes: usize, per_class: usize) -> Result<Dataset> {
    if keep_classes == 0 || per_class == 0 {
        return invalid("keep_classes and per_class must be positive");
    }
    let mut picked: BTreeMap<usize, Vec<usize>> = (0..keep_classes).map(|c| (c, Vec::new())).collect();
    for (i, &l) in raw.labels.iter().enumerate() {
        if let Some(v) = picked.get_mut(&(l as usize)) {
            if v.len() < per_class {
                v.push(i);
            }
        }
    }
    let dim = (raw.rows * raw.cols).max(1).next_power_of_two();
    let mut examples = Vec::with_capacity(keep_classes * per_class);
    for (class, idx) in picked {
        if idx.len() < per_class {
            return Err(Error::InsufficientData(format!(
                "class {class} has {} images, {per_class} required",
                idx.len()
            )));
        }
        for i in idx {
            let mut v: Vec<f64> = raw.images[i].iter().map(|&p| p as f64 / 255.0).collect();
            v.resize(dim, 0.0);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroNorm(i));
            }
            v.iter_mut().for_each(|x| *x /= norm);
            examples.push(Example { features: Features::Amplitudes(v), label: class });
        }
    }
    Dataset::new(examples, keep_classes, FeatureKind::Amplitude)
}
