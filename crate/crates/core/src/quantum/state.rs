use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{outer, Axis, CMatrix, C0, C1};

const NORM_TOL: f64 = 1e-9;

/// Pure state of an `n`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis index, so the basis
/// state `|q0 q1 ... q_{n-1}>` sits at index `q0·2^{n-1} + ... + q_{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![C0; 1 << n_qubits];
        amplitudes[0] = C1;
        StateVector { n_qubits, amplitudes }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![C0; dim];
        amplitudes[index] = C1;
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm one.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {dim} is not a power of two"
            )));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { n_qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `|psi><psi|`
    pub fn density_matrix(&self) -> CMatrix {
        outer(&self.amplitudes)
    }

    /// `<Z_q>`, handy for single-qubit checks.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Applies `exp(-i·angle·P/2)` to `qubit`.
    pub fn apply_rotation(mut self, axis: Axis, qubit: usize, angle: f64) -> Result<Self> {
        self.check_qubit(qubit)?;
        self.rotate(axis, qubit, angle);
        Ok(self)
    }

    pub fn apply_cnot(mut self, control: usize, target: usize) -> Result<Self> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameQubit(control));
        }
        self.cnot(control, target);
        Ok(self)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    // Unchecked in-place gate kernels used by the circuit runners.

    pub(crate) fn rotate(&mut self, axis: Axis, qubit: usize, angle: f64) {
        let mask = self.mask(qubit);
        let (s, c) = (angle / 2.0).sin_cos();
        match axis {
            Axis::Z => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { lo } else { hi };
                }
            }
            Axis::X => {
                let ms = Complex64::new(0.0, -s);
                self.for_pairs(mask, |a0, a1| (c * a0 + ms * a1, ms * a0 + c * a1));
            }
            Axis::Y => {
                self.for_pairs(mask, |a0, a1| (c * a0 - s * a1, s * a0 + c * a1));
            }
        }
    }

    pub(crate) fn cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    #[inline]
    fn for_pairs(&mut self, mask: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (n0, n1) = f(self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = n0;
                self.amplitudes[j] = n1;
            }
        }
    }
}
