use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{summarize, Summary};
use super::{read_rows, validate_hurst, validate_time, write_rows, Batch, NoiseDefaults, Problem};
use crate::ec3::Ec3Instance;
use crate::error::{Error, Result};
use crate::evolve::DEFAULT_DT;

pub const DEFAULT_BIN_WIDTH: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSettings {
    pub h_list: Vec<f64>,
    pub total_time: f64,
    pub realizations: usize,
    pub dt: f64,
    pub noise: NoiseDefaults,
    pub seed: u64,
    pub bin_width: f64,
}

impl EnsembleSettings {
    pub fn new(h_list: Vec<f64>, total_time: f64, realizations: usize, seed: u64) -> Self {
        Self {
            h_list,
            total_time,
            realizations,
            dt: DEFAULT_DT,
            noise: NoiseDefaults::default(),
            seed,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }

    fn validate(&self) -> Result<()> {
        validate_hurst(&self.h_list)?;
        validate_time(self.total_time, self.dt)?;
        if self.realizations == 0 {
            return Err(Error::invalid("realizations must be >= 1"));
        }
        if !(self.bin_width > 0.0 && self.bin_width <= 1.0) {
            return Err(Error::invalid(format!("bin width {} outside (0, 1]", self.bin_width)));
        }
        self.noise.params(self.h_list[0]).map(|_| ())
    }
}

/// Fixed-width histogram over `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Self {
        let bins = ((1.0 / bin_width).round() as usize).max(1);
        let mut counts = vec![0; bins];
        for &v in values {
            let k = ((v / bin_width).floor().max(0.0) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { bin_width, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        (k as f64 * self.bin_width, ((k + 1) as f64 * self.bin_width).min(1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub h_list: Vec<f64>,
    /// `[instance][h]`, averaged over realizations.
    pub mean_fidelity: Vec<Vec<f64>>,
    /// Noiseless fidelity per instance.
    pub baseline: Vec<f64>,
    /// Distribution of per-instance means, one per Hurst value.
    pub histograms: Vec<Histogram>,
    /// Moments of the per-instance means, one per Hurst value.
    pub moments: Vec<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub instance_id: usize,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "mean_F")]
    pub mean_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub instance_id: usize,
    #[serde(rename = "F0")]
    pub f0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: usize,
}

impl EnsembleStats {
    pub fn rows(&self) -> Vec<EnsembleRow> {
        let mut rows = Vec::new();
        for (id, means) in self.mean_fidelity.iter().enumerate() {
            for (&h, &mean_f) in self.h_list.iter().zip(means) {
                rows.push(EnsembleRow {
                    instance_id: id,
                    h,
                    mean_f,
                });
            }
        }
        rows
    }

    /// Columns `instance_id,H,mean_F`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(&self.rows(), out)
    }

    /// Columns `instance_id,F0`.
    pub fn write_baseline_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<BaselineRow> = self
            .baseline
            .iter()
            .enumerate()
            .map(|(instance_id, &f0)| BaselineRow { instance_id, f0 })
            .collect();
        write_rows(&rows, out)
    }

    /// Columns `H,bin_lo,bin_hi,count`.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows = Vec::new();
        for (&h, hist) in self.h_list.iter().zip(&self.histograms) {
            for (k, &count) in hist.counts.iter().enumerate() {
                let (bin_lo, bin_hi) = hist.edges(k);
                rows.push(HistogramRow {
                    h,
                    bin_lo,
                    bin_hi,
                    count,
                });
            }
        }
        write_rows(&rows, out)
    }
}

pub fn read_ensemble_csv<R: Read>(input: R) -> Result<Vec<EnsembleRow>> {
    read_rows(input)
}

/// Mean fidelity of every instance at every Hurst value, and the resulting
/// distributions. Instance ids are positions in `instances`.
pub fn ensemble(instances: &[Ec3Instance], settings: &EnsembleSettings) -> Result<EnsembleStats> {
    settings.validate()?;
    let n = instances
        .first()
        .ok_or_else(|| Error::invalid("ensemble needs at least one instance"))?
        .n();
    if instances.iter().any(|i| i.n() != n) {
        return Err(Error::invalid("ensemble instances differ in bit count"));
    }
    let batch = Batch {
        total_time: settings.total_time,
        dt: settings.dt,
        hurst: &settings.h_list,
        realizations: settings.realizations,
        noise: settings.noise,
        seed: settings.seed,
    };
    let per_instance: Vec<(f64, Vec<f64>)> = instances
        .par_iter()
        .enumerate()
        .map(|(id, instance)| {
            let out = batch.run(&Problem::from_instance(instance)?, &[id as u64])?;
            let means = out
                .fidelities
                .iter()
                .map(|f| summarize(f).map(|s| s.mean))
                .collect::<Result<_>>()?;
            Ok((out.baseline, means))
        })
        .collect::<Result<_>>()?;

    let (baseline, mean_fidelity): (Vec<f64>, Vec<Vec<f64>>) = per_instance.into_iter().unzip();
    let mut histograms = Vec::new();
    let mut moments = Vec::new();
    for j in 0..settings.h_list.len() {
        let column: Vec<f64> = mean_fidelity.iter().map(|m| m[j]).collect();
        histograms.push(Histogram::from_values(&column, settings.bin_width));
        moments.push(summarize(&column)?);
    }
    Ok(EnsembleStats {
        h_list: settings.h_list.clone(),
        mean_fidelity,
        baseline,
        histograms,
        moments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{sweep, SweepSettings};

    #[test]
    fn histogram_binning() {
        let h = Histogram::from_values(&[0.0, 0.019, 0.02, 0.5, 1.0, 0.999], 0.02);
        assert_eq!(h.counts.len(), 50);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[25], 1);
        assert_eq!(h.counts[49], 2);
        assert_eq!(h.total(), 6);
        assert_eq!(h.edges(49), (0.98, 1.0));
    }

    #[test]
    fn single_instance_matches_sweep_cell() {
        let inst = Ec3Instance::four_bit_example();
        let stats = ensemble(std::slice::from_ref(&inst), &EnsembleSettings::new(vec![0.2], 1.0, 5, 4)).unwrap();
        let cell = sweep(
            &Problem::from_instance(&inst).unwrap(),
            &SweepSettings::new(vec![1.0], vec![0.2], 5, 4),
        )
        .unwrap();
        assert_eq!(stats.mean_fidelity[0][0], cell.mean_fidelity[0][0]);
        assert_eq!(stats.baseline[0], cell.baseline_fidelity[0]);
        assert_eq!(stats.histograms[0].total(), 1);
    }

    #[test]
    fn histogram_counts_match_instance_count() {
        let mut rng = crate::rng::substream(3, &[5], crate::rng::Purpose::Generation);
        let instances: Vec<Ec3Instance> = (0..4)
            .map(|_| crate::ec3::generate_instance(5, &mut rng).unwrap())
            .collect();
        let stats = ensemble(&instances, &EnsembleSettings::new(vec![0.1, 0.6], 1.0, 3, 2)).unwrap();
        assert!(stats.histograms.iter().all(|h| h.total() == 4));
        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"instance_id,H,mean_F\n"));
        assert_eq!(read_ensemble_csv(buf.as_slice()).unwrap(), stats.rows());
    }

    #[test]
    fn rejects_mixed_sizes() {
        let a = Ec3Instance::four_bit_example();
        let b = Ec3Instance::six_bit_example();
        assert!(ensemble(&[a, b], &EnsembleSettings::new(vec![0.1], 1.0, 1, 0)).is_err());
        assert!(ensemble(&[], &EnsembleSettings::new(vec![0.1], 1.0, 1, 0)).is_err());
    }
}
