//! Approximate fractional Brownian motion and the noise fed to the evolution.
//!
//! The regularized process is `B_t^ε = ∫_0^t (t - s + ε)^α dW_s` with
//! `α = H - 1/2`. It splits into a drift `∫ φ(s) ds` and a scaled Brownian
//! term `ε^α W_t`, where `φ(t) = α ∫_0^t (t - u + ε)^(α-1) dW_u`. On a
//! partition of `[0, t]` into `M` equal pieces the drift becomes
//! `α √(t/M) Σ_k (t - k t/M + ε)^(α-1) g_k` with standard normal `g_k`.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Purpose, StreamRng};

pub const DEFAULT_EPSILON: f64 = 1e-3;

/// How `φ(t_i)` is drawn at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMode {
    /// Independent Gaussians `g_k` regenerated at every step.
    #[default]
    PerStepFresh,
    /// `φ(t_i)` accumulated from the same increments that drive `dW`.
    ConsistentPath,
}

impl std::str::FromStr for PhiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-step-fresh" | "fresh" => Ok(Self::PerStepFresh),
            "consistent-path" | "consistent" => Ok(Self::ConsistentPath),
            other => Err(Error::invalid(format!(
                "unknown phi mode {other:?} (expected per-step-fresh or consistent-path)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    hurst: f64,
    epsilon: f64,
    alpha: f64,
    phi_mode: PhiMode,
    /// Overrides `M = max(1, round(t/Δt))` in per-step-fresh mode.
    phi_subintervals: Option<usize>,
}

impl NoiseParams {
    pub fn new(hurst: f64, epsilon: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid(format!("hurst {hurst} outside (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon {epsilon} must be positive")));
        }
        Ok(Self {
            hurst,
            epsilon,
            alpha: hurst - 0.5,
            phi_mode: PhiMode::default(),
            phi_subintervals: None,
        })
    }

    pub fn with_phi_mode(mut self, mode: PhiMode) -> Self {
        self.phi_mode = mode;
        self
    }

    pub fn with_phi_subintervals(mut self, m: Option<usize>) -> Result<Self> {
        if m == Some(0) {
            return Err(Error::invalid("phi subinterval count must be >= 1"));
        }
        self.phi_subintervals = m;
        Ok(self)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi_mode(&self) -> PhiMode {
        self.phi_mode
    }

    pub fn phi_subintervals(&self) -> Option<usize> {
        self.phi_subintervals
    }

    /// `ε^α`, the weight on `dW`. Exactly 1 at `H = 1/2`.
    pub fn noise_amplitude(&self) -> f64 {
        self.epsilon.powf(self.alpha)
    }
}

/// `Z √dt` with `Z` standard normal.
pub fn brownian_increment<R: Rng + ?Sized>(dt: f64, rng: &mut R) -> f64 {
    assert!(dt > 0.0, "increment length must be positive");
    let z: f64 = rng.sample(StandardNormal);
    z * dt.sqrt()
}

/// Weights of the discretized drift integral at one time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiKernel {
    alpha: f64,
    sub_width: f64,
    /// `(t - k t/M + ε)^(α-1)` for `k = 0..M`.
    weights: Vec<f64>,
}

impl PhiKernel {
    pub fn new(t: f64, params: &NoiseParams, m: usize) -> Self {
        assert!(t >= 0.0 && m >= 1, "kernel needs t >= 0 and M >= 1");
        let alpha = params.alpha;
        let sub_width = t / m as f64;
        let weights = (0..m)
            .map(|k| (t - k as f64 * sub_width + params.epsilon).powf(alpha - 1.0))
            .collect();
        Self {
            alpha,
            sub_width,
            weights,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `α √(t/M) Σ_k w_k g_k` with fresh `g_k`.
    pub fn sample_fresh<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sum: f64 = self
            .weights
            .iter()
            .map(|w| w * rng.sample::<f64, _>(StandardNormal))
            .sum();
        self.alpha * self.sub_width.sqrt() * sum
    }

    /// `α Σ_k w_k ΔW_k` over recorded increments, oldest first.
    pub fn apply_to_increments(&self, increments: &[f64]) -> f64 {
        assert_eq!(
            increments.len(),
            self.weights.len(),
            "one increment per subinterval"
        );
        let sum: f64 = self.weights.iter().zip(increments).map(|(w, dw)| w * dw).sum();
        self.alpha * sum
    }

    /// `Var φ = α² (t/M) Σ_k w_k²`.
    pub fn variance(&self) -> f64 {
        self.alpha * self.alpha * self.sub_width * self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// One fresh draw of `φ(t)` over `m_subintervals` pieces. Zero when `t = 0`.
pub fn sample_phi<R: Rng + ?Sized>(
    t: f64,
    params: &NoiseParams,
    m_subintervals: usize,
    rng: &mut R,
) -> f64 {
    assert!(m_subintervals >= 1, "need at least one subinterval");
    if t == 0.0 || params.alpha == 0.0 {
        return 0.0;
    }
    PhiKernel::new(t, params, m_subintervals).sample_fresh(rng)
}

/// Position of one evolution step on the time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Number of completed steps before this one.
    pub index: usize,
    /// Left endpoint `t_i`.
    pub time: f64,
    /// Length of this step; shorter than `nominal_dt` only on a remainder step.
    pub dt: f64,
    pub nominal_dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSample {
    pub phi: f64,
    pub dw: f64,
}

/// Source of per-step `(φ, dW)` pairs for one realization.
pub trait NoiseDriver {
    fn sample(&mut self, step: &StepInfo) -> NoiseSample;
}

/// Noise that is identically zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl NoiseDriver for Silent {
    fn sample(&mut self, _step: &StepInfo) -> NoiseSample {
        NoiseSample::default()
    }
}

/// The approximate-fBm driver: `dW` from one substream, fresh drift Gaussians
/// from another.
#[derive(Debug, Clone)]
pub struct FbmDriver {
    params: NoiseParams,
    increments: StreamRng,
    drift: StreamRng,
    history: Vec<f64>,
}

impl FbmDriver {
    pub fn new(params: NoiseParams, increments: StreamRng, drift: StreamRng) -> Self {
        Self {
            params,
            increments,
            drift,
            history: Vec::new(),
        }
    }

    pub fn from_substream(params: NoiseParams, seed: u64, path: &[u64]) -> Self {
        Self::new(
            params,
            substream(seed, path, Purpose::Increments),
            substream(seed, path, Purpose::Drift),
        )
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    /// Drift kernel for a step. Depends only on the parameters and the step,
    /// so one kernel serves every realization. `None` when `φ` vanishes.
    pub fn kernel_for(params: &NoiseParams, step: &StepInfo) -> Option<PhiKernel> {
        if step.time == 0.0 || params.alpha == 0.0 {
            return None;
        }
        let m = match params.phi_mode {
            PhiMode::PerStepFresh => params.phi_subintervals.unwrap_or_else(|| {
                ((step.time / step.nominal_dt).round() as usize).max(1)
            }),
            PhiMode::ConsistentPath => step.index,
        };
        if m == 0 {
            return None;
        }
        Some(PhiKernel::new(step.time, params, m))
    }

    /// Draws `φ(t_i)` and then `dW_i`, using a precomputed kernel.
    pub fn sample_with(&mut self, step: &StepInfo, kernel: Option<&PhiKernel>) -> NoiseSample {
        let phi = match (kernel, self.params.phi_mode) {
            (None, _) => 0.0,
            (Some(k), PhiMode::PerStepFresh) => k.sample_fresh(&mut self.drift),
            (Some(k), PhiMode::ConsistentPath) => k.apply_to_increments(&self.history),
        };
        let dw = brownian_increment(step.dt, &mut self.increments);
        if self.params.phi_mode == PhiMode::ConsistentPath {
            self.history.push(dw);
        }
        NoiseSample { phi, dw }
    }
}

impl NoiseDriver for FbmDriver {
    fn sample(&mut self, step: &StepInfo) -> NoiseSample {
        let kernel = Self::kernel_for(&self.params, step);
        self.sample_with(step, kernel.as_ref())
    }
}

const GRID_TOLERANCE: f64 = 1e-9;

/// Uniform time grid starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(end: f64, steps: usize) -> Result<Self> {
        if !(end > 0.0) || steps == 0 {
            return Err(Error::invalid("grid needs a positive end time and >= 1 step"));
        }
        let dt = end / steps as f64;
        Ok(Self {
            times: (0..=steps).map(|i| i as f64 * dt).collect(),
        })
    }

    /// Accepts explicit times; they must start at 0 and be equally spaced.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(Error::invalid("grid must start at 0 and have >= 2 points"));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::invalid("grid must be increasing"));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > GRID_TOLERANCE * dt.max(1.0) {
                return Err(Error::invalid("grid is not uniform"));
            }
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn position(&self, t: f64) -> Option<usize> {
        let i = (t / self.dt()).round();
        if i < 0.0 || i as usize >= self.times.len() {
            return None;
        }
        let i = i as usize;
        ((self.times[i] - t).abs() <= GRID_TOLERANCE * self.dt().max(1.0)).then_some(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FbmPath {
    /// Two columns `t,value` with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<path csv>", e))?;
        Ok(())
    }
}

/// `B_{t_i}^ε = Σ_{j<i} (t_i - t_j + ε)^α ΔW_j` from one increment sequence.
pub fn sample_fbm_path<R: Rng + ?Sized>(
    params: &NoiseParams,
    grid: &TimeGrid,
    rng: &mut R,
) -> FbmPath {
    let times = grid.times().to_vec();
    let increments: Vec<f64> = times
        .windows(2)
        .map(|w| brownian_increment(w[1] - w[0], rng))
        .collect();
    let values = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            increments[..i]
                .iter()
                .zip(&times)
                .fold(0.0, |acc, (dw, &tj)| {
                    acc + (t - tj + params.epsilon).powf(params.alpha) * dw
                })
        })
        .collect();
    FbmPath { times, values }
}

fn values_at(paths: &[FbmPath], t: f64) -> Result<Vec<f64>> {
    paths
        .iter()
        .map(|p| {
            let grid = TimeGrid::from_times(p.times.clone())?;
            grid.position(t)
                .map(|i| p.values[i])
                .ok_or_else(|| Error::invalid(format!("time {t} is not on the path grid")))
        })
        .collect()
}

/// Unbiased sample covariance of path values at `s` and `t`, and its standard
/// error (sample deviation of the centred products over `√N`).
pub fn empirical_covariance_with_error(paths: &[FbmPath], s: f64, t: f64) -> Result<(f64, f64)> {
    if paths.len() < 2 {
        return Err(Error::invalid("covariance needs at least two paths"));
    }
    let xs = values_at(paths, s)?;
    let ys = values_at(paths, t)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let products: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let cov = products.iter().sum::<f64>() / (n - 1.0);
    let mean_p = products.iter().sum::<f64>() / n;
    let var_p = products.iter().map(|p| (p - mean_p).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((cov, (var_p / n).sqrt()))
}

pub fn empirical_covariance(paths: &[FbmPath], s: f64, t: f64) -> Result<f64> {
    empirical_covariance_with_error(paths, s, t).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn params_validation() {
        assert!(NoiseParams::new(0.0, 1e-3).is_err());
        assert!(NoiseParams::new(1.0, 1e-3).is_err());
        assert!(NoiseParams::new(0.3, 0.0).is_err());
        let p = NoiseParams::new(0.3, 1e-3).unwrap();
        assert_eq!(p.alpha(), 0.3 - 0.5);
        assert_eq!(NoiseParams::new(0.5, 1e-3).unwrap().noise_amplitude(), 1.0);
        assert!(p.with_phi_subintervals(Some(0)).is_err());
    }

    #[test]
    fn brownian_increment_moments() {
        let dt = 0.01;
        let n = 100_000;
        let mut r = rng(1);
        let xs: Vec<f64> = (0..n).map(|_| brownian_increment(dt, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!(mean.abs() < 4.0 * (dt / n as f64).sqrt(), "mean {mean}");
        assert!((var / dt - 1.0).abs() < 0.05, "var {var}");

        let again: Vec<f64> = {
            let mut r = rng(1);
            (0..n).map(|_| brownian_increment(dt, &mut r)).collect()
        };
        assert_eq!(xs, again);
    }

    #[test]
    fn phi_vanishes_at_origin_and_for_white_noise() {
        let p = NoiseParams::new(0.3, 1e-3).unwrap();
        assert_eq!(sample_phi(0.0, &p, 10, &mut rng(2)), 0.0);
        let white = NoiseParams::new(0.5, 1e-3).unwrap();
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(sample_phi(t, &white, 50, &mut rng(3)), 0.0);
        }
    }

    #[test]
    fn phi_variance_matches_gaussian_sum() {
        let p = NoiseParams::new(0.3, 1e-3).unwrap();
        let (t, m) = (1.0, 100);
        let alpha = p.alpha();
        let expected = alpha * alpha * (t / m as f64)
            * (0..m)
                .map(|k| (t - k as f64 * t / m as f64 + 1e-3).powf(2.0 * alpha - 2.0))
                .sum::<f64>();
        let mut r = rng(4);
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_phi(t, &p, m, &mut r)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
        assert!((PhiKernel::new(t, &p, m).variance() / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_weights_are_finite_and_positive() {
        for h in [0.01, 0.25, 0.75, 0.99] {
            let p = NoiseParams::new(h, 1e-3).unwrap();
            let k = PhiKernel::new(2.0, &p, 200);
            assert!(k.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        }
    }

    #[test]
    fn consistent_mode_reuses_increments() {
        let p = NoiseParams::new(0.2, 1e-3).unwrap().with_phi_mode(PhiMode::ConsistentPath);
        let mut d = FbmDriver::from_substream(p, 9, &[0]);
        let dt = 0.01;
        let mut dws = Vec::new();
        for i in 0..20 {
            let step = StepInfo { index: i, time: i as f64 * dt, dt, nominal_dt: dt };
            let s = d.sample(&step);
            let expected: f64 = p.alpha()
                * dws
                    .iter()
                    .enumerate()
                    .map(|(j, dw)| (step.time - j as f64 * dt + 1e-3).powf(p.alpha() - 1.0) * dw)
                    .sum::<f64>();
            assert!((s.phi - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            dws.push(s.dw);
        }
    }

    #[test]
    fn fresh_mode_uses_separate_drift_stream() {
        let p = NoiseParams::new(0.2, 1e-3).unwrap();
        let white = NoiseParams::new(0.5, 1e-3).unwrap();
        let mut a = FbmDriver::from_substream(p, 5, &[1]);
        let mut b = FbmDriver::from_substream(white, 5, &[1]);
        for i in 0..10 {
            let step = StepInfo { index: i, time: i as f64 * 0.01, dt: 0.01, nominal_dt: 0.01 };
            assert_eq!(a.sample(&step).dw, b.sample(&step).dw);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::from_times(vec![0.0, 0.1, 0.3]).is_err());
        assert!(TimeGrid::from_times(vec![0.1, 0.2, 0.3]).is_err());
        let g = TimeGrid::uniform(1.0, 100).unwrap();
        assert_eq!(g.position(0.5), Some(50));
        assert_eq!(g.position(0.505), None);
    }

    #[test]
    fn path_starts_at_zero_and_has_discrete_variance() {
        let p = NoiseParams::new(0.25, 1e-3).unwrap();
        let grid = TimeGrid::uniform(1.0, 50).unwrap();
        let mut r = rng(6);
        let paths: Vec<FbmPath> = (0..10_000).map(|_| sample_fbm_path(&p, &grid, &mut r)).collect();
        assert!(paths.iter().all(|q| q.values[0] == 0.0));
        // exact variance of the discrete Gaussian sum at t = 1
        let dt = grid.dt();
        let exact: f64 = (0..50)
            .map(|j| (1.0 - j as f64 * dt + 1e-3).powf(2.0 * p.alpha()) * dt)
            .sum();
        let (var, se) = empirical_covariance_with_error(&paths, 1.0, 1.0).unwrap();
        assert!((var - exact).abs() < 3.0 * se, "{var} vs {exact} (se {se})");
    }

    #[test]
    fn white_noise_paths_have_brownian_covariance() {
        let p = NoiseParams::new(0.5, 1e-3).unwrap();
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let mut r = rng(7);
        let paths: Vec<FbmPath> = (0..10_000).map(|_| sample_fbm_path(&p, &grid, &mut r)).collect();
        for (s, t) in [(0.5, 1.0), (0.25, 0.75), (1.0, 1.0)] {
            let (c, se) = empirical_covariance_with_error(&paths, s, t).unwrap();
            assert!((c - f64::min(s, t)).abs() < 3.0 * se, "({s},{t}): {c} ± {se}");
        }
    }

    #[test]
    fn covariance_edge_cases() {
        let flat = FbmPath { times: vec![0.0, 0.5, 1.0], values: vec![0.0, 2.0, 2.0] };
        let paths = vec![flat.clone(), flat.clone(), flat];
        assert_eq!(empirical_covariance(&paths, 0.5, 1.0).unwrap(), 0.0);
        assert!(empirical_covariance(&paths, 0.3, 1.0).is_err());
        assert!(empirical_covariance(&paths[..1], 0.5, 1.0).is_err());

        let a = FbmPath { times: vec![0.0, 1.0], values: vec![0.0, 1.0] };
        let b = FbmPath { times: vec![0.0, 1.0], values: vec![0.0, 3.0] };
        // sample variance of {1, 3} is 2
        assert_eq!(empirical_covariance(&[a, b], 1.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn path_csv_has_header() {
        let p = NoiseParams::new(0.4, 1e-3).unwrap();
        let path = sample_fbm_path(&p, &TimeGrid::uniform(1.0, 4).unwrap(), &mut rng(8));
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,value\n0,0\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
