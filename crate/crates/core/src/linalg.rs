//! Small dense complex linear-algebra helpers shared by the simulator,
//! the measurement constructions and the geometry metrics.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C1: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The 2x2 Pauli matrix for this axis.
    pub fn matrix(self) -> CMatrix {
        match self {
            Axis::X => CMatrix::from_row_slice(2, 2, &[C0, C1, C1, C0]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[C0, -CI, CI, C0]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[C1, C0, C0, -C1]),
        }
    }
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Projector `|v><v|`.
pub fn outer(v: &[Complex64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn ensure_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let r = hermitian_residual(m);
    if r > tol {
        return Err(Error::NotHermitian(r));
    }
    Ok(())
}

pub fn ensure_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
    }
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: m.ncols() });
    }
    Ok(())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Real part of the Hilbert–Schmidt inner product `Tr(a† b)`.
pub fn hs_inner_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Numerical rank from singular values above `tol`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > tol)
        .count()
}

/// Row-major real/imaginary split, the on-disk form of a complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixDoc {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        MatrixDoc { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl TryFrom<&MatrixDoc> for CMatrix {
    type Error = Error;

    fn try_from(doc: &MatrixDoc) -> Result<Self> {
        let n = doc.re.len();
        if doc.im.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: doc.im.len() });
        }
        let m = doc.re.first().map_or(0, Vec::len);
        for (r, i) in doc.re.iter().zip(&doc.im) {
            if r.len() != m || i.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: r.len().min(i.len()) });
            }
        }
        Ok(CMatrix::from_fn(n, m, |i, j| Complex64::new(doc.re[i][j], doc.im[i][j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = Axis::X.matrix();
        let y = Axis::Y.matrix();
        let z = Axis::Z.matrix();
        assert!((&x * &x - identity(2)).norm() < 1e-15);
        // XY = iZ
        assert!((&x * &y - z.map(|v| v * CI)).norm() < 1e-15);
        assert_eq!(trace(&z), C0);
        assert!((trace_product(&x, &x).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn norms_and_rank() {
        let z = Axis::Z.matrix();
        assert!((spectral_norm(&z) - 1.0).abs() < 1e-12);
        assert!((frobenius_norm(&z) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rank(&outer(&[C1, C0]), 1e-9), 1);
        assert_eq!(hermitian_eigenvalues(&z), vec![-1.0, 1.0]);
    }

    #[test]
    fn hermiticity() {
        assert_eq!(hermitian_residual(&Axis::Y.matrix()), 0.0);
        let m = CMatrix::from_row_slice(2, 2, &[C0, C1, C0, C0]);
        assert!(ensure_hermitian(&m, 1e-10).is_err());
    }

    #[test]
    fn matrix_doc_roundtrip() {
        let y = Axis::Y.matrix();
        let doc = MatrixDoc::from(&y);
        let back = CMatrix::try_from(&doc).unwrap();
        assert_eq!(back, y);
    }
}
