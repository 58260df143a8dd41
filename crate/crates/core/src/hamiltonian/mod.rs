//! Problem encoding and the adiabatic path.
//!
//! `Ec3Instance → QuboMatrix → IsingCoefficients → DiagonalHamiltonian`, plus the
//! transverse-field start `H_I = -Σ σ^x` and the linear interpolation between them.

mod operator;
mod qubo;
mod spectrum;

pub use operator::{
    build_final_hamiltonian, build_final_hamiltonian_with, build_initial_hamiltonian,
    ground_state_index, interpolate, ConstantPolicy, DiagonalHamiltonian, HermitianOperator,
    DEGENERACY_TOLERANCE, HERMITIAN_TOLERANCE, MAX_DENSE_QUBITS,
};
pub use qubo::{build_qubo, qubo_to_ising, IsingCoefficients, QuboMatrix};
pub use spectrum::{
    schedule_grid, spectrum_scan, SpectrumReport, SpectrumSummary, DEFAULT_GRID_RESOLUTION,
    DEFAULT_LEVELS, MAX_SCAN_DIM,
};

use crate::ec3::Ec3Instance;
use crate::error::Result;

/// Full compilation of an instance to its final Hamiltonian, constant retained.
pub fn final_hamiltonian(instance: &Ec3Instance) -> Result<DiagonalHamiltonian> {
    build_final_hamiltonian(&qubo_to_ising(&build_qubo(instance)))
}
