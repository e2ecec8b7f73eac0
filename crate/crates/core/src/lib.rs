//! Localizable entanglement and its computable lower bounds on nontrivial
//! loops of Kitaev and color codes in a parallel magnetic field, with
//! dephasing dynamics and finite-size scaling of the transition.

pub mod codes;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod localize;
pub mod pauli;
pub mod qpt;
pub mod spectrum;
pub mod state;
pub mod subspace;
pub mod witness;

pub use error::{Error, Result};
