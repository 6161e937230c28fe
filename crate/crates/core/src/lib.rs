//! Quantum trajectories of Bose- and Fermi-Hubbard chains whose atoms
//! scatter structured probe light into a cavity, together with a Lindblad
//! master-equation oracle and closed-form reference models.
//!
//! The layers build on each other:
//!
//! - [`fock`]: fixed-number occupation bases and sparse operators.
//! - [`model`]: Hubbard Hamiltonians and `H_eff`.
//! - [`probe`]: light-amplitude operators `D`, `B` and the jump channels.
//! - [`trajectory`]: the jump/no-jump engine and the master equation.
//! - [`observables`]: mode distributions, variances, correlations, entropy.
//! - [`reference`]: analytic predictions used as oracles.
//! - [`run`]: configuration files, artifact directories, the CLI commands.
//!
//! Units: `hbar = 1`; rates and energies share one unit, times are its
//! inverse.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod probe;
pub mod reference;
pub mod run;
pub mod trajectory;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
