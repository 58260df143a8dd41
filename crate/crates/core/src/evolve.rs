//! Discretized time evolution along `H(t) = (1 - t/T) H_I + (t/T) H_F`.
//!
//! Each step freezes `H` at the left endpoint `t_i` and applies
//! `exp(-iθH)`. Noiseless steps use `θ = Δt`; noisy steps use
//! `θ = (1 + φ) Δt + ε^α dW`, the explicit solution of the frozen stochastic
//! equation (its `-½ ε^{2α} H²` drift is already accounted for by the
//! exponential).

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{interpolate, DiagonalHamiltonian, HermitianOperator};
use crate::linalg::Propagator;
use crate::noise::{FbmDriver, NoiseDriver, NoiseParams, StepInfo};

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_DT: f64 = 0.01;

/// Relative slack when deciding whether `T/Δt` is a whole number of steps.
const STEP_COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "state length {dim} is not a power of two >= 2"
            )));
        }
        let state = Self {
            n: dim.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Multiplies every amplitude by `e^{iγ}`.
    pub fn with_global_phase(mut self, gamma: f64) -> Self {
        let phase = Complex64::from_polar(1.0, gamma);
        self.amplitudes.iter_mut().for_each(|a| *a *= phase);
        self
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }
}

/// Uniform superposition, the ground state of `H_I`.
pub fn initial_state(n: usize) -> Result<StateVector> {
    if n == 0 || n > crate::hamiltonian::MAX_DENSE_QUBITS {
        return Err(Error::invalid(format!("unsupported qubit count {n}")));
    }
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    StateVector::new(vec![amp; dim])
}

/// `|⟨ground_index|ψ⟩|²`.
pub fn fidelity(state: &StateVector, ground_index: usize) -> Result<f64> {
    state
        .amplitudes
        .get(ground_index)
        .map(Complex64::norm_sqr)
        .ok_or_else(|| {
            Error::invalid(format!(
                "ground index {ground_index} out of range for dimension {}",
                state.dim()
            ))
        })
}

/// Rotation angle of one noisy step.
pub fn noisy_angle(dt: f64, phi: f64, dw: f64, params: &NoiseParams) -> f64 {
    (1.0 + phi) * dt + params.noise_amplitude() * dw
}

fn check_dims(state: &StateVector, h: &HermitianOperator) -> Result<()> {
    if state.dim() != h.dim() {
        return Err(Error::invalid(format!(
            "state dimension {} does not match operator dimension {}",
            state.dim(),
            h.dim()
        )));
    }
    Ok(())
}

/// `exp(-iHΔt) ψ`.
pub fn step_noiseless(state: &StateVector, h: &HermitianOperator, dt: f64) -> Result<StateVector> {
    check_dims(state, h)?;
    let mut next = state.clone();
    Propagator::new(h)?.apply(dt, next.amplitudes_mut());
    Ok(next)
}

/// `exp(-iH(1+φ)Δt - iε^α H dW) ψ`.
pub fn step_noisy(
    state: &StateVector,
    h: &HermitianOperator,
    dt: f64,
    phi: f64,
    dw: f64,
    params: &NoiseParams,
) -> Result<StateVector> {
    check_dims(state, h)?;
    let mut next = state.clone();
    Propagator::new(h)?.apply(noisy_angle(dt, phi, dw, params), next.amplitudes_mut());
    Ok(next)
}

/// One Euler–Maruyama step of the frozen stochastic equation
/// `dψ = (-iH - ½ε^{2α}H² - iφH) ψ dt - iε^α H ψ dW`, renormalized.
/// Only used to cross-check [`step_noisy`].
pub fn euler_maruyama_step(
    state: &StateVector,
    h: &HermitianOperator,
    dt: f64,
    phi: f64,
    dw: f64,
    params: &NoiseParams,
) -> Result<StateVector> {
    check_dims(state, h)?;
    let amp = params.noise_amplitude();
    let psi = DVector::from_column_slice(state.amplitudes());
    let h_psi = h.entries() * &psi;
    let h2_psi = h.entries() * &h_psi;
    let i = Complex64::i();
    let drift = h_psi.map(|z| -i * (1.0 + phi) * z) - h2_psi.scale(0.5 * amp * amp);
    let diffusion = h_psi.map(|z| -i * amp * z);
    let next = &psi + drift.scale(dt) + diffusion.scale(dw);
    let norm = next.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Numerical("Euler-Maruyama step lost the state".into()));
    }
    StateVector::new(next.unscale(norm).iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub total_time: f64,
    pub dt: f64,
    pub noise: Option<NoiseParams>,
    pub seed: u64,
    pub record_trajectory: bool,
}

impl EvolutionConfig {
    pub fn noiseless(total_time: f64, dt: f64) -> Result<Self> {
        let config = Self {
            total_time,
            dt,
            noise: None,
            seed: 0,
            record_trajectory: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn noisy(total_time: f64, dt: f64, params: NoiseParams, seed: u64) -> Result<Self> {
        let config = Self {
            noise: Some(params),
            seed,
            ..Self::noiseless(total_time, dt)?
        };
        Ok(config)
    }

    pub fn recording(mut self, on: bool) -> Self {
        self.record_trajectory = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::invalid(format!(
                "total time {} must be positive",
                self.total_time
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid(format!("time step {} must be positive", self.dt)));
        }
        if self.dt > self.total_time * (1.0 + STEP_COUNT_SLACK) {
            return Err(Error::invalid(format!(
                "time step {} exceeds total time {}",
                self.dt, self.total_time
            )));
        }
        Ok(())
    }

    /// Steps `t_i = iΔt` up to `T`; a fractional remainder becomes one
    /// shortened final step.
    pub fn steps(&self) -> Vec<StepInfo> {
        step_schedule(self.total_time, self.dt)
    }

    pub fn num_steps(&self) -> usize {
        self.steps().len()
    }
}

pub fn step_schedule(total_time: f64, dt: f64) -> Vec<StepInfo> {
    let ratio = total_time / dt;
    let whole = (ratio + STEP_COUNT_SLACK * ratio.max(1.0)).floor() as usize;
    let remainder = total_time - whole as f64 * dt;
    let count = if remainder > STEP_COUNT_SLACK * dt {
        whole + 1
    } else {
        whole.max(1)
    };
    (0..count)
        .map(|i| {
            let time = i as f64 * dt;
            let len = if i + 1 == count { total_time - time } else { dt };
            StepInfo {
                index: i,
                time,
                dt: len,
                nominal_dt: dt,
            }
        })
        .collect()
}

/// Frozen Hamiltonian for a step.
pub fn hamiltonian_at(
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    t: f64,
    total_time: f64,
) -> Result<HermitianOperator> {
    interpolate(hi, hf, (t / total_time).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// Full states, recorded for single-qubit runs.
    States(Vec<(f64, StateVector)>),
    /// Ground-state fidelity after each step, recorded for larger systems.
    Fidelities(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_state: StateVector,
    pub fidelity: f64,
    pub trajectory: Option<Trajectory>,
}

fn check_problem(
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
) -> Result<()> {
    if hi.dim() != hf.dim() {
        return Err(Error::invalid("initial and final Hamiltonians differ in dimension"));
    }
    if ground_index >= hf.dim() {
        return Err(Error::invalid(format!("ground index {ground_index} out of range")));
    }
    Ok(())
}

/// Shared step loop. `observer` sees the time and state after every step.
fn evolve(
    config: &EvolutionConfig,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
    initial: StateVector,
    mut noise: Option<(&NoiseParams, &mut dyn NoiseDriver)>,
    observer: &mut dyn FnMut(f64, &StateVector),
) -> Result<RunResult> {
    config.validate()?;
    check_problem(hi, hf, ground_index)?;
    if initial.dim() != hf.dim() {
        return Err(Error::invalid("initial state dimension mismatch"));
    }
    let single_qubit = hf.n() == 1;
    let mut state = initial;
    let mut trajectory = config.record_trajectory.then(|| {
        if single_qubit {
            Trajectory::States(vec![(0.0, state.clone())])
        } else {
            Trajectory::Fidelities(vec![(0.0, state.amplitudes[ground_index].norm_sqr())])
        }
    });

    for step in config.steps() {
        let h = hamiltonian_at(hi, hf, step.time, config.total_time)?;
        let theta = match noise.as_mut() {
            None => step.dt,
            Some((params, driver)) => {
                let sample = driver.sample(&step);
                noisy_angle(step.dt, sample.phi, sample.dw, params)
            }
        };
        Propagator::new(&h)?.apply(theta, state.amplitudes_mut());
        let t = step.time + step.dt;
        observer(t, &state);
        match trajectory.as_mut() {
            Some(Trajectory::States(v)) => v.push((t, state.clone())),
            Some(Trajectory::Fidelities(v)) => {
                v.push((t, state.amplitudes[ground_index].norm_sqr()))
            }
            None => {}
        }
    }

    Ok(RunResult {
        fidelity: fidelity(&state, ground_index)?,
        final_state: state,
        trajectory,
    })
}

/// Noiseless adiabatic evolution from the uniform superposition.
pub fn run_standard(
    config: &EvolutionConfig,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
) -> Result<RunResult> {
    if config.noise.is_some() {
        return Err(Error::invalid("run_standard expects a noiseless configuration"));
    }
    evolve(config, hi, hf, ground_index, initial_state(hf.n())?, None, &mut |_, _| {})
}

/// Noisy evolution driven by the substreams of `config.seed`.
pub fn run_noisy(
    config: &EvolutionConfig,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
) -> Result<RunResult> {
    let params = config
        .noise
        .ok_or_else(|| Error::invalid("run_noisy expects noise parameters"))?;
    let mut driver = FbmDriver::from_substream(params, config.seed, &[]);
    run_with_driver(config, hi, hf, ground_index, &mut driver)
}

/// Noisy evolution with an explicit noise source; `config.noise` supplies `ε^α`.
pub fn run_with_driver(
    config: &EvolutionConfig,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
    driver: &mut dyn NoiseDriver,
) -> Result<RunResult> {
    run_observed(config, hi, hf, ground_index, initial_state(hf.n())?, Some(driver), &mut |_, _| {})
}

/// General entry point: any initial state, optional noise (requires
/// `config.noise` when given), and a per-step observer.
pub fn run_observed(
    config: &EvolutionConfig,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
    initial: StateVector,
    driver: Option<&mut dyn NoiseDriver>,
    observer: &mut dyn FnMut(f64, &StateVector),
) -> Result<RunResult> {
    let noise = match (driver, config.noise.as_ref()) {
        (None, _) => None,
        (Some(d), Some(p)) => Some((p, d)),
        (Some(_), None) => {
            return Err(Error::invalid("a noise driver needs noise parameters in the config"))
        }
    };
    evolve(config, hi, hf, ground_index, initial, noise, observer)
}

/// A group of realizations evolved together by [`run_cohorts`].
#[derive(Debug, Clone)]
pub enum Cohort {
    /// The single noiseless run.
    Noiseless,
    /// Independent fBm realizations sharing one noise model.
    Fbm {
        params: NoiseParams,
        drivers: Vec<FbmDriver>,
    },
    /// `count` noisy runs whose `φ` and `dW` are forced to zero.
    Silent { params: NoiseParams, count: usize },
}

impl Cohort {
    pub fn noisy(params: NoiseParams, drivers: Vec<FbmDriver>) -> Self {
        Self::Fbm { params, drivers }
    }

    pub fn members(&self) -> usize {
        match self {
            Self::Noiseless => 1,
            Self::Fbm { drivers, .. } => drivers.len(),
            Self::Silent { count, .. } => *count,
        }
    }
}

/// Evolves every member of every cohort in lockstep so each frozen `H(t_i)`
/// is diagonalized once. Member results are identical to running them one
/// at a time with [`run_standard`] or [`run_with_driver`].
pub fn run_cohorts(
    total_time: f64,
    dt: f64,
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    ground_index: usize,
    mut cohorts: Vec<Cohort>,
) -> Result<Vec<Vec<StateVector>>> {
    let config = EvolutionConfig::noiseless(total_time, dt)?;
    check_problem(hi, hf, ground_index)?;
    for c in &cohorts {
        if let Cohort::Fbm { params, drivers } = c {
            if drivers.iter().any(|d| d.params() != params) {
                return Err(Error::invalid("cohort drivers disagree with the cohort noise model"));
            }
        }
    }
    let start = initial_state(hf.n())?;
    let mut states: Vec<Vec<StateVector>> = cohorts
        .iter()
        .map(|c| vec![start.clone(); c.members()])
        .collect();

    for step in config.steps() {
        let h = hamiltonian_at(hi, hf, step.time, total_time)?;
        let propagator = Propagator::new(&h)?;
        for (cohort, members) in cohorts.iter_mut().zip(states.iter_mut()) {
            match cohort {
                Cohort::Noiseless => propagator.apply(step.dt, members[0].amplitudes_mut()),
                Cohort::Silent { params, .. } => {
                    let theta = noisy_angle(step.dt, 0.0, 0.0, params);
                    members
                        .par_iter_mut()
                        .for_each(|state| propagator.apply(theta, state.amplitudes_mut()));
                }
                Cohort::Fbm { params, drivers } => {
                    let params = *params;
                    let kernel = FbmDriver::kernel_for(&params, &step);
                    members
                        .par_iter_mut()
                        .zip(drivers.par_iter_mut())
                        .for_each(|(state, driver)| {
                            let sample = driver.sample_with(&step, kernel.as_ref());
                            let theta = noisy_angle(step.dt, sample.phi, sample.dw, &params);
                            propagator.apply(theta, state.amplitudes_mut());
                        });
                }
            }
        }
    }
    Ok(states)
}
