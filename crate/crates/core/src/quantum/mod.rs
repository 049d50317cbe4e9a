//! Dense complex linear algebra for two- and four-level systems and a
//! fixed-step Schrödinger integrator.
//!
//! Basis convention: index 0 is the ground state and the +1 eigenstate of
//! `sigma_z`; `sigma_plus` maps ground to excited. In tensor products the qubit
//! is the left factor and the coupler the right.

mod evolve;
mod operator;
mod state;

pub use evolve::{evolve, EvolutionResult, Observable, TimeDependentHamiltonian};
pub use operator::{tensor, OperatorMatrix};
pub use state::{expectation, StateVector};

pub use num_complex::Complex64;
