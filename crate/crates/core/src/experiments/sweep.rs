use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::summarize;
use super::{read_rows, validate_hurst, validate_time, write_rows, Batch, NoiseDefaults, Problem};
use crate::error::{Error, Result};
use crate::evolve::DEFAULT_DT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub t_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub realizations: usize,
    pub dt: f64,
    pub noise: NoiseDefaults,
    pub seed: u64,
}

impl SweepSettings {
    pub fn new(t_grid: Vec<f64>, h_grid: Vec<f64>, realizations: usize, seed: u64) -> Self {
        Self {
            t_grid,
            h_grid,
            realizations,
            dt: DEFAULT_DT,
            noise: NoiseDefaults::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::invalid("T grid is empty"));
        }
        for &t in &self.t_grid {
            validate_time(t, self.dt)?;
        }
        validate_hurst(&self.h_grid)?;
        if self.realizations == 0 {
            return Err(Error::invalid("realizations must be >= 1"));
        }
        self.noise.params(self.h_grid[0]).map(|_| ())
    }
}

/// Grid of averaged fidelities; `[i][j]` indexes `t_grid[i]`, `h_grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub t_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub mean_fidelity: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub baseline_fidelity: Vec<f64>,
    /// `F̄ / F₀`; NaN where the baseline is zero.
    pub speedup: Vec<Vec<f64>>,
    pub realizations: usize,
    /// First error hit; cells of the failing evolution times hold NaN.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "mean_F")]
    pub mean_f: f64,
    #[serde(rename = "se_F")]
    pub se_f: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "SP")]
    pub sp: f64,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::with_capacity(self.t_grid.len() * self.h_grid.len());
        for (i, &t) in self.t_grid.iter().enumerate() {
            for (j, &h) in self.h_grid.iter().enumerate() {
                rows.push(SweepRow {
                    t,
                    h,
                    mean_f: self.mean_fidelity[i][j],
                    se_f: self.std_error[i][j],
                    f0: self.baseline_fidelity[i],
                    sp: self.speedup[i][j],
                });
            }
        }
        rows
    }

    /// Columns `T,H,mean_F,se_F,F0,SP`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows(), out)
    }
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    read_rows(input)
}

/// Averages `realizations` noisy runs per `(T, H)` cell against one
/// noiseless run per `T`.
pub fn sweep(problem: &Problem, settings: &SweepSettings) -> Result<SweepResult> {
    settings.validate()?;
    let outcomes: Vec<Result<(f64, Vec<(f64, f64)>)>> = settings
        .t_grid
        .par_iter()
        .map(|&t| {
            let batch = Batch {
                total_time: t,
                dt: settings.dt,
                hurst: &settings.h_grid,
                realizations: settings.realizations,
                noise: settings.noise,
                seed: settings.seed,
            };
            let out = batch.run(problem, &[0])?;
            let cells = out
                .fidelities
                .iter()
                .map(|f| summarize(f).map(|s| (s.mean, s.se)))
                .collect::<Result<_>>()?;
            Ok((out.baseline, cells))
        })
        .collect();

    let width = settings.h_grid.len();
    let mut result = SweepResult {
        t_grid: settings.t_grid.clone(),
        h_grid: settings.h_grid.clone(),
        mean_fidelity: Vec::new(),
        std_error: Vec::new(),
        baseline_fidelity: Vec::new(),
        speedup: Vec::new(),
        realizations: settings.realizations,
        failure: None,
    };
    for outcome in outcomes {
        match outcome {
            Ok((baseline, cells)) => {
                result.baseline_fidelity.push(baseline);
                result.mean_fidelity.push(cells.iter().map(|c| c.0).collect());
                result.std_error.push(cells.iter().map(|c| c.1).collect());
                result.speedup.push(
                    cells
                        .iter()
                        .map(|c| super::speedup(c.0, baseline).unwrap_or(f64::NAN))
                        .collect(),
                );
            }
            Err(e) => {
                result.failure.get_or_insert_with(|| e.to_string());
                result.baseline_fidelity.push(f64::NAN);
                for grid in [&mut result.mean_fidelity, &mut result.std_error, &mut result.speedup] {
                    grid.push(vec![f64::NAN; width]);
                }
            }
        }
    }
    Ok(result)
}
