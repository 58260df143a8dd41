use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::summarize;
use super::{read_rows, validate_hurst, validate_time, write_rows, Batch, NoiseDefaults, Problem};
use crate::ec3::{generate_instance, Ec3Instance};
use crate::error::{Error, Result};
use crate::evolve::DEFAULT_DT;
use crate::hamiltonian::MAX_DENSE_QUBITS;
use crate::rng::{substream, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSettings {
    pub n_range: Vec<usize>,
    pub instances_per_n: usize,
    pub h_list: Vec<f64>,
    pub total_time: f64,
    pub realizations: usize,
    pub dt: f64,
    pub noise: NoiseDefaults,
    pub seed: u64,
}

impl ScalingSettings {
    pub fn new(
        n_range: Vec<usize>,
        instances_per_n: usize,
        h_list: Vec<f64>,
        total_time: f64,
        realizations: usize,
        seed: u64,
    ) -> Self {
        Self {
            n_range,
            instances_per_n,
            h_list,
            total_time,
            realizations,
            dt: DEFAULT_DT,
            noise: NoiseDefaults::default(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_range.is_empty() {
            return Err(Error::invalid("n range is empty"));
        }
        if let Some(&n) = self.n_range.iter().find(|&&n| !(4..=MAX_DENSE_QUBITS).contains(&n)) {
            return Err(Error::Resource(format!(
                "n = {n} outside the supported range 4..={MAX_DENSE_QUBITS}"
            )));
        }
        if self.instances_per_n == 0 || self.realizations == 0 {
            return Err(Error::invalid("instance and realization counts must be >= 1"));
        }
        validate_hurst(&self.h_list)?;
        validate_time(self.total_time, self.dt)?;
        self.noise.params(self.h_list[0]).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "mean_F")]
    pub mean_f: f64,
    #[serde(rename = "std_F")]
    pub std_f: f64,
    #[serde(rename = "mean_SP")]
    pub mean_sp: f64,
    #[serde(rename = "std_SP")]
    pub std_sp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    /// One row per `(n, H)`, in `n_range` then `h_list` order.
    pub rows: Vec<ScalingRow>,
    /// Generated instances per `n`.
    pub instances: Vec<(usize, Vec<Ec3Instance>)>,
}

impl ScalingResult {
    /// Columns `n,H,mean_F,std_F,mean_SP,std_SP`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows, out)
    }

    pub fn row(&self, n: usize, h: f64) -> Option<&ScalingRow> {
        self.rows.iter().find(|r| r.n == n && r.h == h)
    }
}

pub fn read_scaling_csv<R: Read>(input: R) -> Result<Vec<ScalingRow>> {
    read_rows(input)
}

/// Instances for one bit count, drawn from the generation substream of `n`.
pub fn scaling_instances(seed: u64, n: usize, count: usize) -> Result<Vec<Ec3Instance>> {
    let mut rng = substream(seed, &[n as u64], Purpose::Generation);
    (0..count).map(|_| generate_instance(n, &mut rng)).collect()
}

/// Fresh random instances per `n`; per-instance `F̄` and `SP`, then their
/// mean and spread across instances.
pub fn scaling_study(settings: &ScalingSettings) -> Result<ScalingResult> {
    settings.validate()?;
    let batch = Batch {
        total_time: settings.total_time,
        dt: settings.dt,
        hurst: &settings.h_list,
        realizations: settings.realizations,
        noise: settings.noise,
        seed: settings.seed,
    };
    let mut rows = Vec::new();
    let mut generated = Vec::new();
    for &n in &settings.n_range {
        let instances = scaling_instances(settings.seed, n, settings.instances_per_n)?;
        // per instance: (F̄, SP) for every H
        let per_instance: Vec<Vec<(f64, f64)>> = instances
            .par_iter()
            .enumerate()
            .map(|(i, instance)| {
                let out = batch.run(&Problem::from_instance(instance)?, &[n as u64, i as u64])?;
                out.fidelities
                    .iter()
                    .map(|f| {
                        let mean = summarize(f)?.mean;
                        Ok((mean, super::speedup(mean, out.baseline)?))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (j, &h) in settings.h_list.iter().enumerate() {
            let f: Vec<f64> = per_instance.iter().map(|v| v[j].0).collect();
            let sp: Vec<f64> = per_instance.iter().map(|v| v[j].1).collect();
            let (f, sp) = (summarize(&f)?, summarize(&sp)?);
            rows.push(ScalingRow {
                n,
                h,
                mean_f: f.mean,
                std_f: f.std,
                mean_sp: sp.mean,
                std_sp: sp.std,
            });
        }
        generated.push((n, instances));
    }
    Ok(ScalingResult {
        rows,
        instances: generated,
    })
}
