//! Truncated Fock-basis verification of multimode GKP codes: code words,
//! finite-energy stabilizers, envelope-preserving gates and sBs dissipation.

pub mod codeword;
pub mod damping;
pub mod error;
pub mod logical;
pub mod ops;
pub mod sbs;
pub mod state;

pub use codeword::{build_codeword, expectation_t, CodewordSpec};
pub use error::{FockError, Result};
pub use logical::{decay_error_prob, quantum_error_prob, QuantumEstimate, TrajectoryConfig};
pub use ops::{apply, OperatorSpec, Translation};
pub use state::FockState;
