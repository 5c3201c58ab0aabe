//! Adiabatic quantum computing with qubit-ensemble encoding.
//!
//! Each logical spin of an Ising problem is carried by an ensemble of `N`
//! qubits that only couple through collective spin operators. The crate covers
//! the classical landscape of the encoded problem, exact spectra in the
//! symmetric subspace, a mean-field description valid for large `N`, open- and
//! closed-system annealing dynamics, and inter-ensemble entanglement.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod instances;
pub mod landscape;
pub mod meanfield;
mod optimize;
pub mod spectrum;
pub mod symspace;

pub use error::{Error, Result};
pub use instances::{ProblemInstance, SpinConfiguration};
