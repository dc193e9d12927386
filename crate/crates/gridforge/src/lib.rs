//! Multimode GKP grid codes: symplectic lattice algebra, gauge calculus,
//! code construction and search, and two translation-error decoders.

pub mod classical;
pub mod code_switch;
pub mod error;
pub mod gauge;
pub mod homodyne;
pub mod lattice;
pub mod search;
pub mod symplectic;

pub use error::{GridError, Result};
pub use gauge::GaugeState;
pub use lattice::{catalog, GkpLattice, LogicalFrame, Pauli};
