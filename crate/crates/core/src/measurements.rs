//! Measurement operator sets and their validation.
//!
//! Every set stores only the local `2^D × 2^D` operators acting on the
//! feature qubits. On the full register they act as `o ⊗ I`; see [`embed`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    ensure_square, hermitian_residual, hs_inner_re, identity, kron, outer, rank, spectral_norm, Axis,
    CMatrix, MatrixDoc, C0,
};
use crate::quantum::StateVector;

const HERMITIAN_TOL: f64 = 1e-10;
const GRAM_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-9;

/// `K` Hermitian operators on `D` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub name: String,
    pub d_qubits: usize,
    pub operators: Vec<CMatrix>,
    /// `B` when `Tr(o_k o_k') = B δ_kk'`; `None` for non-orthogonal sets.
    pub ortho_constant: Option<f64>,
    /// `C2 = max_k ‖o_k‖`
    pub norm_bound: f64,
}

impl MeasurementSet {
    /// Builds a set from arbitrary operators. `B` and `C2` are measured, not assumed.
    pub fn from_operators(name: impl Into<String>, d_qubits: usize, operators: Vec<CMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return invalid("measurement set needs at least one operator");
        }
        let dim = 1usize << d_qubits;
        for o in &operators {
            ensure_square(o, dim)?;
            let r = hermitian_residual(o);
            if r > HERMITIAN_TOL {
                return Err(Error::NotHermitian(r));
            }
        }
        let gram = gram(&operators);
        let ortho_constant = fitted_ortho_constant(&gram);
        let norm_bound = operators.iter().map(spectral_norm).fold(0.0, f64::max);
        Ok(MeasurementSet { name: name.into(), d_qubits, operators, ortho_constant, norm_bound })
    }

    pub fn k(&self) -> usize {
        self.operators.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.d_qubits
    }

    /// Same operators multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let s = Complex64::new(c, 0.0);
        Self::from_operators(
            format!("{}*{c}", self.name),
            self.d_qubits,
            self.operators.iter().map(|o| o * s).collect(),
        )
    }

    pub fn to_doc(&self) -> MeasurementDoc {
        MeasurementDoc {
            name: self.name.clone(),
            d_qubits: self.d_qubits,
            operators: self.operators.iter().map(MatrixDoc::from).collect(),
            ortho_constant: self.ortho_constant,
            norm_bound: self.norm_bound,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    /// Reads a set back, recomputing `B` and `C2` from the operators.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeasurementDoc = serde_json::from_str(text)?;
        let ops = doc.operators.iter().map(CMatrix::try_from).collect::<Result<Vec<_>>>()?;
        Self::from_operators(doc.name, doc.d_qubits, ops)
    }
}

/// Serialized form of a [`MeasurementSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDoc {
    pub name: String,
    pub d_qubits: usize,
    pub operators: Vec<MatrixDoc>,
    pub ortho_constant: Option<f64>,
    pub norm_bound: f64,
}

fn gram(ops: &[CMatrix]) -> DMatrix<f64> {
    let k = ops.len();
    DMatrix::from_fn(k, k, |i, j| hs_inner_re(&ops[i], &ops[j]))
}

fn fitted_ortho_constant(gram: &DMatrix<f64>) -> Option<f64> {
    let k = gram.nrows();
    let b = gram[(0, 0)];
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { b } else { 0.0 };
            if (gram[(i, j)] - target).abs() > GRAM_TOL {
                return None;
            }
        }
    }
    (b > GRAM_TOL).then_some(b)
}

fn check_room(k: usize, d_qubits: usize) -> Result<()> {
    if k == 0 {
        return invalid("need at least one class");
    }
    if d_qubits >= usize::BITS as usize || (1usize << d_qubits) < k {
        return invalid(format!("2^{d_qubits} feature dimensions cannot hold {k} classes"));
    }
    Ok(())
}

/// Projectors `|k><k|` for `k < K`.
pub fn basis_measurements(k: usize, d_qubits: usize) -> Result<MeasurementSet> {
    check_room(k, d_qubits)?;
    let ops = (0..k)
        .map(|i| outer(StateVector::basis(d_qubits, i).expect("index checked").amplitudes()))
        .collect();
    MeasurementSet::from_operators("basis", d_qubits, ops)
}

/// The nine two-qubit Pauli pairs `XX, XY, ..., ZZ`, in that order.
pub fn pauli_measurements() -> MeasurementSet {
    let ops = Axis::ALL
        .iter()
        .flat_map(|a| Axis::ALL.iter().map(move |b| kron(&a.matrix(), &b.matrix())))
        .collect();
    MeasurementSet::from_operators("pauli_pairs", 2, ops).expect("Pauli pairs are Hermitian")
}

/// `o ⊗ I` on an `n_qubits` register.
pub fn embed(o: &CMatrix, n_qubits: usize) -> Result<CMatrix> {
    let d = o.nrows().trailing_zeros() as usize;
    if !o.nrows().is_power_of_two() || d > n_qubits {
        return invalid(format!("cannot embed a {}-row operator into {n_qubits} qubits", o.nrows()));
    }
    Ok(kron(o, &identity(1 << (n_qubits - d))))
}

/// Standard simplex frame `√(K/(K−1)) (I − 11ᵀ/K)` placed in the first `K`
/// coordinates of `R^{2^D}`. Column `k` is the unit vector for class `k`.
pub fn simplex_etf_frame(k: usize, d_qubits: usize) -> Result<DMatrix<f64>> {
    check_room(k, d_qubits)?;
    if k < 2 {
        return invalid("a simplex frame needs K >= 2");
    }
    let kf = k as f64;
    let scale = (kf / (kf - 1.0)).sqrt();
    let dim = 1usize << d_qubits;
    Ok(DMatrix::from_fn(dim, k, |i, j| {
        if i >= k {
            0.0
        } else if i == j {
            scale * (1.0 - 1.0 / kf)
        } else {
            -scale / kf
        }
    }))
}

/// Rank-1 operators `|m_k><m_k|` from the simplex frame columns.
pub fn simplex_etf_operators(k: usize, d_qubits: usize) -> Result<MeasurementSet> {
    let m = simplex_etf_frame(k, d_qubits)?;
    let ops = (0..k)
        .map(|j| {
            let v: Vec<Complex64> = m.column(j).iter().map(|&x| Complex64::new(x, 0.0)).collect();
            outer(&v)
        })
        .collect();
    MeasurementSet::from_operators("simplex_etf", d_qubits, ops)
}

/// Bloch vectors of the regular tetrahedron, first one on the `+Z` pole.
pub fn tetrahedron() -> [[f64; 3]; 4] {
    let s = 2f64.sqrt();
    [
        [0.0, 0.0, 1.0],
        [2.0 * s / 3.0, 0.0, -1.0 / 3.0],
        [-s / 3.0, (2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
        [-s / 3.0, -(2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
    ]
}

/// Pure qubit state with Bloch vector `r` (unit length).
pub fn bloch_state(r: [f64; 3]) -> StateVector {
    let theta = r[2].clamp(-1.0, 1.0).acos();
    let phi = r[1].atan2(r[0]);
    let amps = vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ];
    StateVector::from_amplitudes(amps).expect("unit Bloch vector")
}

/// The four tetrahedral states underlying the qubit SIC-POVM.
pub fn qubit_sic_states() -> [StateVector; 4] {
    tetrahedron().map(bloch_state)
}

/// Tetrahedral qubit SIC-POVM: `(I + r_k·σ)/4`, summing to the identity.
pub fn qubit_sic_povm() -> MeasurementSet {
    let ops = tetrahedron()
        .iter()
        .map(|r| {
            let mut o = identity(2);
            for (a, c) in Axis::ALL.iter().zip(r) {
                o += a.matrix() * Complex64::new(*c, 0.0);
            }
            o * Complex64::new(0.25, 0.0)
        })
        .collect();
    MeasurementSet::from_operators("qubit_sic", 1, ops).expect("SIC operators are Hermitian")
}

/// Diagnostics for a [`MeasurementSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub k: usize,
    pub d_qubits: usize,
    pub hermitian_residuals: Vec<f64>,
    /// `Re Tr(o_k o_k')`
    pub gram: Vec<Vec<f64>>,
    pub fitted_b: Option<f64>,
    pub c2: f64,
    /// Rank of the `K × 4^D` matrix of vectorized operators.
    pub span_rank: usize,
    pub spans_full_space: bool,
    pub hermitian_ok: bool,
    pub orthogonal_ok: bool,
    /// Stored `B` and `C2` agree with the measured ones.
    pub consistent: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.orthogonal_ok && self.consistent
    }
}

pub fn validate_set(ms: &MeasurementSet) -> ValidationReport {
    let k = ms.k();
    let hermitian_residuals: Vec<f64> = ms.operators.iter().map(hermitian_residual).collect();
    let g = gram(&ms.operators);
    let fitted_b = fitted_ortho_constant(&g);
    let c2 = ms.operators.iter().map(spectral_norm).fold(0.0, f64::max);
    let dim2 = ms.dim() * ms.dim();
    let vecs = CMatrix::from_fn(k, dim2, |r, c| ms.operators[r].as_slice().get(c).copied().unwrap_or(C0));
    let span_rank = rank(&vecs, RANK_TOL);
    let b_consistent = match (ms.ortho_constant, fitted_b) {
        (Some(a), Some(b)) => (a - b).abs() <= GRAM_TOL,
        (None, None) => true,
        _ => false,
    };
    ValidationReport {
        k,
        d_qubits: ms.d_qubits,
        hermitian_ok: hermitian_residuals.iter().all(|&r| r < HERMITIAN_TOL),
        hermitian_residuals,
        gram: (0..k).map(|i| g.row(i).iter().copied().collect()).collect(),
        orthogonal_ok: fitted_b.is_some(),
        fitted_b,
        consistent: b_consistent && (c2 - ms.norm_bound).abs() <= GRAM_TOL,
        c2,
        span_rank,
        spans_full_space: span_rank == dim2,
    }
}
