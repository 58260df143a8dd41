//! Experiment families built on the evolution engine: `T × H` sweeps,
//! instance ensembles, scaling studies and single-qubit Bloch trajectories.
//!
//! Every realization draws from its own substream keyed by
//! `(seed, instance, T, H, realization)`, with `T` and `H` entering by value.
//! Results therefore do not depend on thread count, grid order or which
//! other cells are run alongside.

mod bloch;
mod ensemble;
mod scaling;
pub mod stats;
mod sweep;

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ec3::Ec3Instance;
use crate::error::{Error, Result};
use crate::evolve::{fidelity, run_cohorts, Cohort, StateVector};
use crate::hamiltonian::{
    build_initial_hamiltonian, final_hamiltonian, ground_state_index, DiagonalHamiltonian,
    HermitianOperator,
};
use crate::noise::{FbmDriver, NoiseParams, PhiMode, DEFAULT_EPSILON};

pub use bloch::{bloch_point, bloch_trajectory, read_bloch_csv, BlochRow, BlochTrajectory};
pub use ensemble::{
    ensemble, read_ensemble_csv, EnsembleRow, EnsembleSettings, EnsembleStats, Histogram,
    DEFAULT_BIN_WIDTH,
};
pub use scaling::{read_scaling_csv, scaling_instances, scaling_study, ScalingResult, ScalingRow, ScalingSettings};
pub use stats::Summary;
pub use sweep::{read_sweep_csv, sweep, SweepResult, SweepRow, SweepSettings};

pub const DEFAULT_REALIZATIONS: usize = 100;

/// Everything an evolution needs about one problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub hi: HermitianOperator,
    pub hf: DiagonalHamiltonian,
    pub ground_index: usize,
}

impl Problem {
    pub fn from_instance(instance: &Ec3Instance) -> Result<Self> {
        Self::from_final(final_hamiltonian(instance)?)
    }

    pub fn from_final(hf: DiagonalHamiltonian) -> Result<Self> {
        Ok(Self {
            hi: build_initial_hamiltonian(hf.n())?,
            ground_index: ground_state_index(&hf)?,
            hf,
        })
    }

    pub fn n(&self) -> usize {
        self.hf.n()
    }
}

/// Noise settings shared by every Hurst value of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDefaults {
    pub epsilon: f64,
    pub phi_mode: PhiMode,
    pub phi_subintervals: Option<usize>,
    /// Forces `φ = dW = 0` in every noisy run.
    pub silent: bool,
}

impl Default for NoiseDefaults {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            phi_mode: PhiMode::default(),
            phi_subintervals: None,
            silent: false,
        }
    }
}

impl NoiseDefaults {
    pub fn params(&self, hurst: f64) -> Result<NoiseParams> {
        NoiseParams::new(hurst, self.epsilon)?
            .with_phi_mode(self.phi_mode)
            .with_phi_subintervals(self.phi_subintervals)
    }
}

/// `F̄ / F₀`.
pub fn speedup(mean_noisy: f64, baseline: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(Error::UndefinedSpeedup);
    }
    if !(baseline > 0.0) {
        return Err(Error::invalid(format!("baseline fidelity {baseline} must be positive")));
    }
    Ok(mean_noisy / baseline)
}

/// Measurement probabilities in the computational basis.
pub fn probability_distribution(state: &StateVector) -> Vec<f64> {
    state.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

/// Shared settings for one batch of runs at a fixed evolution time.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Batch<'a> {
    pub total_time: f64,
    pub dt: f64,
    pub hurst: &'a [f64],
    pub realizations: usize,
    pub noise: NoiseDefaults,
    pub seed: u64,
}

/// Noiseless fidelity and per-Hurst realization fidelities.
#[derive(Debug, Clone)]
pub(crate) struct BatchOutcome {
    pub baseline: f64,
    pub fidelities: Vec<Vec<f64>>,
}

impl Batch<'_> {
    /// Runs the noiseless evolution and `realizations` noisy ones for every
    /// Hurst value. `prefix` identifies the instance in the substream path.
    pub fn run(&self, problem: &Problem, prefix: &[u64]) -> Result<BatchOutcome> {
        if self.realizations == 0 {
            return Err(Error::invalid("realizations must be >= 1"));
        }
        let mut cohorts = vec![Cohort::Noiseless];
        for &h in self.hurst {
            let params = self.noise.params(h)?;
            cohorts.push(if self.noise.silent {
                Cohort::Silent {
                    params,
                    count: self.realizations,
                }
            } else {
                let drivers = (0..self.realizations as u64)
                    .map(|r| {
                        let path = realization_path(prefix, self.total_time, h, r);
                        FbmDriver::from_substream(params, self.seed, &path)
                    })
                    .collect();
                Cohort::noisy(params, drivers)
            });
        }
        let states = run_cohorts(
            self.total_time,
            self.dt,
            &problem.hi,
            &problem.hf,
            problem.ground_index,
            cohorts,
        )?;
        let g = problem.ground_index;
        let baseline = fidelity(&states[0][0], g)?;
        let fidelities = states[1..]
            .iter()
            .map(|members| members.iter().map(|s| fidelity(s, g)).collect())
            .collect::<Result<_>>()?;
        Ok(BatchOutcome {
            baseline,
            fidelities,
        })
    }
}

pub(crate) fn realization_path(prefix: &[u64], total_time: f64, hurst: f64, r: u64) -> Vec<u64> {
    let mut path = prefix.to_vec();
    path.extend([total_time.to_bits(), hurst.to_bits(), r]);
    path
}

pub(crate) fn validate_hurst(list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::invalid("hurst list is empty"));
    }
    for &h in list {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::invalid(format!("hurst {h} outside (0, 1)")));
        }
    }
    Ok(())
}

pub(crate) fn validate_time(total_time: f64, dt: f64) -> Result<()> {
    crate::evolve::EvolutionConfig::noiseless(total_time, dt).map(|_| ())
}

/// Serializes rows with a header taken from the row type's field names.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
