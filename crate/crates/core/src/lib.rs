//! Exact diagonalization of the anisotropic XY ring with variable-range,
//! distance-decaying couplings, and the two-site entanglement analyses built
//! on it.
//!
//! The pipeline runs `model` → `hamiltonian` → `eigensolve` → `states` →
//! `entanglement` → `analysis`. Mixed states are kept as weighted eigenvector
//! lists throughout; no `2^N × 2^N` density matrix is ever formed outside the
//! small-`N` oracles.

pub mod analysis;
pub mod eigensolve;
pub mod entanglement;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod states;

pub use error::{Error, Result};
pub use model::{Falloff, ModelSpec};
