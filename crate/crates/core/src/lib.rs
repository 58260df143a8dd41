//! Quantum adiabatic algorithm simulation with multiplicative fractional
//! Brownian motion noise, benchmarked on Exact Cover-3 instances.

pub mod cli;
pub mod ec3;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod noise;
pub mod rng;

pub use error::{Error, Result};
