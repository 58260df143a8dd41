use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{read_rows, write_rows};
use crate::error::{Error, Result};
use crate::evolve::{run_noisy, run_standard, EvolutionConfig, StateVector, Trajectory};
use crate::hamiltonian::{build_initial_hamiltonian, ground_state_index, DiagonalHamiltonian};

const SINGLE_QUBIT_ONLY: &str = "bloch requires a single-qubit system";

#[derive(Debug, Clone, PartialEq)]
pub struct BlochTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochTrajectory {
    pub fn rows(&self) -> Vec<BlochRow> {
        self.times
            .iter()
            .zip(&self.points)
            .map(|(&t, &[x, y, z])| BlochRow { t, x, y, z })
            .collect()
    }

    /// Columns `t,x,y,z`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows(), out)
    }
}

pub fn read_bloch_csv<R: Read>(input: R) -> Result<Vec<BlochRow>> {
    read_rows(input)
}

/// `(2 Re(a* b), 2 Im(a* b), |a|² - |b|²)` for the state `(a, b)`.
pub fn bloch_point(state: &StateVector) -> Result<[f64; 3]> {
    if state.n() != 1 {
        return Err(Error::invalid(SINGLE_QUBIT_ONLY));
    }
    let (a, b): (Complex64, Complex64) = (state.amplitudes()[0], state.amplitudes()[1]);
    let c = a.conj() * b;
    Ok([2.0 * c.re, 2.0 * c.im, a.norm_sqr() - b.norm_sqr()])
}

/// Bloch coordinates of the state after every step, starting from `|+⟩`.
/// Noise comes from `config.noise` and `config.seed` when present.
pub fn bloch_trajectory(config: &EvolutionConfig, hf: &DiagonalHamiltonian) -> Result<BlochTrajectory> {
    if hf.n() != 1 {
        return Err(Error::invalid(SINGLE_QUBIT_ONLY));
    }
    let hi = build_initial_hamiltonian(1)?;
    let ground = ground_state_index(hf).unwrap_or(0);
    let config = config.recording(true);
    let run = match config.noise {
        Some(_) => run_noisy(&config, &hi, hf, ground)?,
        None => run_standard(&config, &hi, hf, ground)?,
    };
    let Some(Trajectory::States(states)) = run.trajectory else {
        return Err(Error::Numerical("single-qubit run did not record states".into()));
    };
    let mut times = Vec::with_capacity(states.len());
    let mut points = Vec::with_capacity(states.len());
    for (t, s) in &states {
        times.push(*t);
        points.push(bloch_point(s)?);
    }
    Ok(BlochTrajectory { times, points })
}
