//! AdaGrad.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-coordinate step `η·g/(√Σg² + ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaGrad {
    pub learning_rate: f64,
    pub epsilon: f64,
    pub accumulator: Vec<f64>,
}

impl AdaGrad {
    pub const EPSILON: f64 = 1e-10;

    pub fn new(learning_rate: f64, n_params: usize) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return invalid(format!("learning rate {learning_rate} must be positive"));
        }
        Ok(AdaGrad { learning_rate, epsilon: Self::EPSILON, accumulator: vec![0.0; n_params] })
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        let n = self.accumulator.len();
        if params.len() != n || grad.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: params.len().max(grad.len()) });
        }
        for ((p, a), g) in params.iter_mut().zip(&mut self.accumulator).zip(grad) {
            *a += g * g;
            *p -= self.learning_rate * g / (a.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
