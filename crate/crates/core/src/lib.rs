//! Isometric tensor-hypercontraction factorizations of electronic-structure
//! Hamiltonians, Fock-space simulation of ancilla-reset Trotter steps and
//! fault-tolerant resource estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithm;
pub mod error;
pub mod fermion;
pub mod focksim;
pub mod hamiltonian;
pub mod linalg;
pub mod resources;
pub mod thc;

pub use error::{Error, Result};
pub use hamiltonian::ElectronicHamiltonian;
pub use thc::ThcFactorization;
