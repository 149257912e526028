//! Quantum classifiers built from a trainable circuit, a reduced feature
//! state and a set of measurement operators, plus the tooling to study
//! their risk, geometry and generalization.

pub mod classifier;
pub mod concentration;
pub mod data;
pub mod error;
pub mod genbound;
pub mod geometry;
pub mod linalg;
pub mod measurements;
pub mod quantum;
pub mod riskcurve;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/circuits.md")]
mod book_circuits {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/measurements.md")]
mod book_measurements {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/training.md")]
mod book_training {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/geometry.md")]
mod book_geometry {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/concentration.md")]
mod book_concentration {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/generalization.md")]
mod book_generalization {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/risk-curves.md")]
mod book_risk_curves {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
