//! Statevector simulation of the classifier circuits: gates, encoders, the
//! hardware-efficient ansatz, partial traces and Haar sampling.

pub mod circuit;
pub mod density;
pub mod haar;
pub mod state;

pub use circuit::{apply_ansatz, encode, AnsatzSpec, EncoderKind, EncoderSpec, Gate, GateCounts};
pub use density::{expectation, expectation_matrix, feature_state, FeatureState};
pub use haar::haar_unitary;
pub use state::StateVector;
