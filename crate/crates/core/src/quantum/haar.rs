use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;

/// Haar-distributed `d×d` unitary.
///
/// QR of a complex Ginibre matrix, with each column of `Q` rephased by the
/// sign of the matching diagonal entry of `R` so the distribution is exactly
/// Haar rather than QR-convention dependent.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMatrix> {
    if dim < 2 {
        return invalid(format!("Haar unitary needs dimension >= 2, got {dim}"));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}
