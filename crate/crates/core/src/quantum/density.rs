use num_complex::Complex64;

use super::state::StateVector;
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    ensure_hermitian, ensure_square, hermitian_eigenvalues, hermitian_residual, trace, trace_product,
    Axis, CMatrix, C0,
};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

/// Reduced density matrix on the first `d_qubits` wires.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureState {
    d_qubits: usize,
    matrix: CMatrix,
}

impl FeatureState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() {
            return invalid(format!("density matrix dimension {dim} is not a power of two"));
        }
        ensure_square(&matrix, dim)?;
        ensure_hermitian(&matrix, HERMITIAN_TOL)?;
        let tr = trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return invalid(format!("density matrix trace {tr} is not 1"));
        }
        let min_ev = hermitian_eigenvalues(&matrix)[0];
        if min_ev < -PSD_TOL {
            return invalid(format!("density matrix has negative eigenvalue {min_ev:e}"));
        }
        Ok(FeatureState { d_qubits: dim.trailing_zeros() as usize, matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        FeatureState { d_qubits: matrix.nrows().trailing_zeros() as usize, matrix }
    }

    pub fn pure(state: &StateVector) -> Self {
        Self::from_matrix_unchecked(state.density_matrix())
    }

    pub fn d_qubits(&self) -> usize {
        self.d_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        trace_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `Tr(ρ o)` for a Hermitian `o` of matching size.
    pub fn expectation(&self, o: &CMatrix) -> Result<f64> {
        expectation_matrix(&self.matrix, o)
    }

    /// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` for single-qubit states.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.d_qubits != 1 {
            return invalid(format!("Bloch vector needs a 1-qubit state, got {} qubits", self.d_qubits));
        }
        let r = Axis::ALL.map(|a| trace_product(&self.matrix, &a.matrix()).re);
        Ok(r)
    }
}

/// `Tr_{rest}(|ψ><ψ|)` keeping the first `d_keep` wires.
pub fn feature_state(state: &StateVector, d_keep: usize) -> Result<FeatureState> {
    let n = state.n_qubits();
    if d_keep == 0 || d_keep > n {
        return invalid(format!("cannot keep {d_keep} of {n} qubits"));
    }
    Ok(FeatureState::from_matrix_unchecked(reduce(state.amplitudes(), n, d_keep)))
}

pub(crate) fn reduce(amps: &[Complex64], n: usize, d_keep: usize) -> CMatrix {
    let dk = 1usize << d_keep;
    let rest = 1usize << (n - d_keep);
    let mut m = CMatrix::from_element(dk, dk, C0);
    for a in 0..dk {
        let ra = &amps[a * rest..(a + 1) * rest];
        for b in a..dk {
            let rb = &amps[b * rest..(b + 1) * rest];
            let v: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
            m[(a, b)] = v;
            m[(b, a)] = v.conj();
        }
    }
    m
}

/// `Tr(ρ o)` on raw matrices. `o` must be Hermitian; the imaginary residue
/// (roundoff only, for Hermitian inputs) is checked and dropped.
pub fn expectation_matrix(rho: &CMatrix, o: &CMatrix) -> Result<f64> {
    ensure_square(o, rho.nrows())?;
    let r = hermitian_residual(o);
    if r > HERMITIAN_TOL {
        return Err(Error::NotHermitian(r));
    }
    let v = trace_product(rho, o);
    if v.im.abs() > HERMITIAN_TOL * (1.0 + v.re.abs()) {
        return invalid(format!("expectation has imaginary part {:e}; is ρ Hermitian?", v.im));
    }
    Ok(v.re)
}

pub fn expectation(rho: &FeatureState, o: &CMatrix) -> Result<f64> {
    rho.expectation(o)
}
