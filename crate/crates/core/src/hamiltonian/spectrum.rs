//! Instantaneous spectrum of `H(s)` along the adiabatic path.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::operator::{interpolate, DiagonalHamiltonian, HermitianOperator};
use crate::linalg;

pub const DEFAULT_GRID_RESOLUTION: f64 = 0.001;
pub const DEFAULT_LEVELS: usize = 3;

/// Largest dimension the scan will diagonalize.
pub const MAX_SCAN_DIM: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub s_grid: Vec<f64>,
    /// `levels[g]` holds the lowest eigenvalues at `s_grid[g]`, ascending.
    pub levels: Vec<Vec<f64>>,
    pub gap_min: f64,
    pub s_at_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub gap_min: f64,
    pub s_at_min: f64,
    pub grid_points: usize,
    pub levels: usize,
}

impl SpectrumReport {
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l[1] - l[0])
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            gap_min: self.gap_min,
            s_at_min: self.s_at_min,
            grid_points: self.s_grid.len(),
            levels: self.levels.first().map_or(0, Vec::len),
        }
    }

    /// Columns `s,E0,E1,…`, one header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.levels.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["s".to_string()];
        header.extend((0..k).map(|i| format!("E{i}")));
        w.write_record(&header)?;
        for (s, row) in self.s_grid.iter().zip(&self.levels) {
            let mut record = vec![s.to_string()];
            record.extend(row.iter().map(f64::to_string));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<spectrum csv>", e))?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv) and recomputes
    /// the gap summary.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.get(0) != Some("s") || headers.len() < 3 {
            return Err(Error::invalid("spectrum csv needs columns s,E0,E1,..."));
        }
        let mut s_grid = Vec::new();
        let mut levels = Vec::new();
        for record in r.records() {
            let record = record?;
            let values: Vec<f64> = record
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::invalid(format!("bad number {v:?}: {e}"))))
                .collect::<Result<_>>()?;
            s_grid.push(values[0]);
            levels.push(values[1..].to_vec());
        }
        let (gap_min, s_at_min) = minimum_gap(&s_grid, &levels)?;
        Ok(Self {
            s_grid,
            levels,
            gap_min,
            s_at_min,
        })
    }
}

/// Uniform grid `s_g = g / K` with `K = round(1 / resolution)`, endpoints included.
pub fn schedule_grid(resolution: f64) -> Result<Vec<f64>> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::invalid(format!(
            "grid resolution {resolution} outside (0, 1]"
        )));
    }
    let intervals = (1.0 / resolution).round().max(1.0) as usize;
    Ok((0..=intervals).map(|g| g as f64 / intervals as f64).collect())
}

/// The `k` lowest eigenvalues of `H(s)` on every grid point, and the minimum
/// gap between the two lowest.
pub fn spectrum_scan(
    hi: &HermitianOperator,
    hf: &DiagonalHamiltonian,
    grid_resolution: f64,
    k: usize,
) -> Result<SpectrumReport> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 levels, got {k}")));
    }
    if hi.dim() > MAX_SCAN_DIM {
        return Err(Error::Resource(format!(
            "dimension {} exceeds the scan limit {MAX_SCAN_DIM}",
            hi.dim()
        )));
    }
    if k > hi.dim() {
        return Err(Error::invalid(format!(
            "requested {k} levels from a {}-dimensional operator",
            hi.dim()
        )));
    }
    let s_grid = schedule_grid(grid_resolution)?;
    let levels = s_grid
        .par_iter()
        .map(|&s| {
            let h = interpolate(hi, hf, s)?;
            let mut values = linalg::eigenvalues(&h)?;
            values.truncate(k);
            Ok(values)
        })
        .collect::<Result<Vec<_>>>()?;
    let (gap_min, s_at_min) = minimum_gap(&s_grid, &levels)?;
    Ok(SpectrumReport {
        s_grid,
        levels,
        gap_min,
        s_at_min,
    })
}

fn minimum_gap(s_grid: &[f64], levels: &[Vec<f64>]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (&s, row) in s_grid.iter().zip(levels) {
        if row.len() < 2 {
            return Err(Error::invalid("each grid point needs two levels"));
        }
        let gap = row[1] - row[0];
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, s));
        }
    }
    best.ok_or_else(|| Error::invalid("empty spectrum"))
}
