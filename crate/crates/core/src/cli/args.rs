use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::evolve::DEFAULT_DT;
use crate::experiments::DEFAULT_REALIZATIONS;
use crate::hamiltonian::DEFAULT_GRID_RESOLUTION;
use crate::noise::{PhiMode, DEFAULT_EPSILON};

pub const OUTPUT_DIR_ENV: &str = "FBM_ADIABATIC_OUT";

/// Quantum adiabatic algorithm simulator with fractional Brownian motion noise.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "fbm-adiabatic", version)]
pub struct ExperimentConfig {
    /// Output directory.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = "results")]
    pub out: PathBuf,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_parser = positive_usize)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Generate a random uniquely satisfiable EC3 instance.
    Generate {
        #[arg(long, value_parser = parse_bits)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Scan the low-lying spectrum of H(s) and report the minimum gap.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Schedule grid spacing.
        #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION, value_parser = parse_resolution)]
        ds: f64,
        /// Levels to track [default: 3, or the dimension if smaller].
        #[arg(long, value_parser = parse_levels)]
        levels: Option<usize>,
    },
    /// Run one evolution and report the ground-state fidelity.
    Evolve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long = "T", value_parser = positive_f64)]
        total_time: f64,
        /// Hurst exponent; omit for a noiseless run.
        #[arg(long, value_parser = parse_hurst)]
        hurst: Option<f64>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Mean fidelity and speedup over a T × H grid.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        /// Evolution times, `start:stop:step` or a comma list.
        #[arg(long = "T", value_parser = parse_time_grid)]
        t_grid: Grid,
        /// Comma list of Hurst exponents in (0, 1).
        #[arg(long, value_parser = parse_hurst_list)]
        hurst: HurstList,
        #[arg(long, default_value_t = DEFAULT_REALIZATIONS, value_parser = positive_usize)]
        realizations: usize,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Fidelity distribution over a set of instances.
    Ensemble {
        /// Instance files; when absent, `--instances` instances of `--n` bits are generated.
        #[arg(long)]
        instance: Vec<PathBuf>,
        #[arg(long, value_parser = parse_bits, required_unless_present = "instance")]
        n: Option<usize>,
        #[arg(long, default_value_t = 20, value_parser = positive_usize)]
        instances: usize,
        #[arg(long = "T", value_parser = positive_f64)]
        total_time: f64,
        #[arg(long, value_parser = parse_hurst_list)]
        hurst: HurstList,
        #[arg(long, default_value_t = DEFAULT_REALIZATIONS, value_parser = positive_usize)]
        realizations: usize,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Mean fidelity and speedup against problem size.
    Scaling {
        /// Bit counts, `start:stop:step` or a comma list.
        #[arg(long = "n-range", value_parser = parse_n_range)]
        n_range: SizeList,
        /// Instances per bit count.
        #[arg(long, default_value_t = 10, value_parser = positive_usize)]
        instances: usize,
        #[arg(long = "T", value_parser = positive_f64)]
        total_time: f64,
        #[arg(long, value_parser = parse_hurst_list)]
        hurst: HurstList,
        #[arg(long, default_value_t = 50, value_parser = positive_usize)]
        realizations: usize,
        #[command(flatten)]
        noise: NoiseArgs,
    },
    /// Bloch-sphere trajectory of a single qubit.
    Bloch {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long = "T", value_parser = positive_f64)]
        total_time: f64,
        #[arg(long, value_parser = parse_hurst)]
        hurst: Option<f64>,
        #[command(flatten)]
        noise: NoiseArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Generate { .. } => "generate",
            Self::Spectrum { .. } => "spectrum",
            Self::Evolve { .. } => "evolve",
            Self::Sweep { .. } => "sweep",
            Self::Ensemble { .. } => "ensemble",
            Self::Scaling { .. } => "scaling",
            Self::Bloch { .. } => "bloch",
        }
    }
}

/// Either an instance file or an explicit final diagonal.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct ProblemArgs {
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Final Hamiltonian diagonal as a comma list, e.g. `1.5,-1.5`.
    #[arg(long, value_parser = parse_diagonal, allow_hyphen_values = true)]
    pub diagonal: Option<Diagonal>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NoiseArgs {
    #[arg(long, default_value_t = DEFAULT_DT, value_parser = positive_f64)]
    pub dt: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON, value_parser = positive_f64)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "phi-mode", default_value = "per-step-fresh", value_parser = parse_phi_mode)]
    pub phi_mode: PhiMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurstList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeList(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagonal(pub Vec<f64>);

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("{s:?} is not a positive integer")),
        Ok(v) => Ok(v),
    }
}

fn parse_bits(s: &str) -> Result<usize, String> {
    let n = positive_usize(s)?;
    if (3..=crate::ec3::MAX_BITS).contains(&n) {
        Ok(n)
    } else {
        Err(format!("{n} outside 3..={}", crate::ec3::MAX_BITS))
    }
}

fn parse_hurst(s: &str) -> Result<f64, String> {
    let h = number(s)?;
    if h > 0.0 && h < 1.0 {
        Ok(h)
    } else {
        Err(format!("hurst {h} outside (0, 1)"))
    }
}

fn parse_resolution(s: &str) -> Result<f64, String> {
    let v = positive_f64(s)?;
    if v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} outside (0, 1]"))
    }
}

fn parse_levels(s: &str) -> Result<usize, String> {
    match positive_usize(s)? {
        1 => Err("need at least 2 levels".into()),
        k => Ok(k),
    }
}

fn parse_phi_mode(s: &str) -> Result<PhiMode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_hurst_list(s: &str) -> Result<HurstList, String> {
    s.split(',').map(parse_hurst).collect::<Result<_, _>>().map(HurstList)
}

fn parse_diagonal(s: &str) -> Result<Diagonal, String> {
    let d: Vec<f64> = s.split(',').map(number).collect::<Result<_, _>>()?;
    if d.len() >= 2 && d.len().is_power_of_two() {
        Ok(Diagonal(d))
    } else {
        Err(format!("diagonal length {} is not a power of two >= 2", d.len()))
    }
}

/// `start:stop:step` (inclusive of `stop`) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(number).collect(),
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step <= 0.0 {
                return Err(format!("range step {step} must be positive"));
            }
            if stop < start {
                return Err(format!("range stop {stop} is below start {start}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // round away binary noise such as 0.30000000000000004
            Ok((0..count)
                .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(format!("{s:?} is neither start:stop:step nor a comma list")),
    }
}

fn parse_time_grid(s: &str) -> Result<Grid, String> {
    let grid = parse_grid(s)?;
    match grid.iter().find(|&&t| t <= 0.0) {
        Some(t) => Err(format!("evolution time {t} must be positive")),
        None => Ok(Grid(grid)),
    }
}

fn parse_n_range(s: &str) -> Result<SizeList, String> {
    parse_grid(s)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 4.0 && v <= crate::hamiltonian::MAX_DENSE_QUBITS as f64 {
                Ok(v as usize)
            } else {
                Err(format!(
                    "bit count {v} is not an integer in 4..={}",
                    crate::hamiltonian::MAX_DENSE_QUBITS
                ))
            }
        })
        .collect::<Result<_, _>>()
        .map(SizeList)
}
