//! Command-line front end.
//!
//! Each command writes its CSV files and a `<command>.manifest.json` into the
//! output directory. Files are written to a temporary sibling and renamed
//! into place. Exit codes: 0 success, 1 usage error, 2 runtime error.

mod args;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use args::{
    parse_grid, Command, Diagonal, ExperimentConfig, Grid, HurstList, NoiseArgs, ProblemArgs,
    SizeList, OUTPUT_DIR_ENV,
};

use crate::ec3::{generate_instance, parse_instance, serialize_instance, Assignment, Ec3Instance};
use crate::error::{Error, Result};
use crate::evolve::{run_noisy, run_standard, EvolutionConfig};
use crate::experiments::{
    bloch_trajectory, ensemble, probability_distribution, scaling_instances, scaling_study, sweep,
    write_rows, EnsembleSettings, NoiseDefaults, Problem, ScalingSettings, SweepSettings,
};
use crate::hamiltonian::{final_hamiltonian, spectrum_scan, DiagonalHamiltonian, DEFAULT_LEVELS};
use crate::rng::{substream, Purpose};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

/// Parses arguments; help and version requests come back as errors too.
pub fn parse_config<I, T>(args: I) -> std::result::Result<ExperimentConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    ExperimentConfig::try_parse_from(args)
}

/// Full program: parse, dispatch, report, map to an exit status.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match dispatch(&config) {
        Ok(report) => {
            println!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summary: String,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct InputDigest {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a ExperimentConfig,
    inputs: &'a [InputDigest],
    outputs: Vec<String>,
    results: &'a Value,
    complete: bool,
    error: Option<&'a str>,
    wall_time_seconds: f64,
}

/// What a command produced before anything touches the disk.
struct Product {
    files: Vec<(String, Vec<u8>)>,
    results: Value,
    summary: String,
    failure: Option<String>,
}

#[derive(Default)]
struct Inputs(Vec<InputDigest>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.0.push(InputDigest {
            path: path.to_path_buf(),
            sha256,
        });
        String::from_utf8(bytes).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    fn instance(&mut self, path: &Path) -> Result<Ec3Instance> {
        parse_instance(&self.read(path)?)
    }

    fn final_hamiltonian(&mut self, problem: &ProblemArgs) -> Result<DiagonalHamiltonian> {
        match (&problem.instance, &problem.diagonal) {
            (Some(path), _) => final_hamiltonian(&self.instance(path)?),
            (None, Some(Diagonal(d))) => DiagonalHamiltonian::from_diagonal(d.clone()),
            (None, None) => Err(Error::invalid("need --instance or --diagonal")),
        }
    }
}

/// Runs the configured command and persists its outputs.
pub fn dispatch(config: &ExperimentConfig) -> Result<Report> {
    match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(|| dispatch_inner(config)),
        None => dispatch_inner(config),
    }
}

fn dispatch_inner(config: &ExperimentConfig) -> Result<Report> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let produced = execute(&config.command, &mut inputs);

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let name = config.command.name();
    let (product, error) = match produced {
        Ok(p) => (p, None),
        Err(e) => {
            let message = e.to_string();
            let empty = Product {
                files: Vec::new(),
                results: Value::Null,
                summary: String::new(),
                failure: Some(message.clone()),
            };
            (empty, Some((e, message)))
        }
    };

    let mut outputs = Vec::new();
    for (file, bytes) in &product.files {
        outputs.push(write_atomic(&config.out, file, bytes)?);
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        config,
        inputs: &inputs.0,
        outputs: product.files.iter().map(|(f, _)| f.clone()).collect(),
        results: &product.results,
        complete: product.failure.is_none(),
        error: product.failure.as_deref(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let mut body = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| Error::invalid(format!("manifest serialization: {e}")))?;
    body.push(b'\n');
    let manifest_path = write_atomic(&config.out, &format!("{name}.manifest.json"), &body)?;

    if let Some((e, _)) = error {
        return Err(e);
    }
    if let Some(failure) = product.failure {
        return Err(Error::Numerical(format!("{name} incomplete: {failure}")));
    }
    Ok(Report {
        summary: product.summary,
        outputs,
        manifest: manifest_path,
    })
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
    Ok(target)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn noise_defaults(noise: &NoiseArgs) -> NoiseDefaults {
    NoiseDefaults {
        epsilon: noise.epsilon,
        phi_mode: noise.phi_mode,
        phi_subintervals: None,
        silent: false,
    }
}

fn evolution_config(total_time: f64, hurst: Option<f64>, noise: &NoiseArgs) -> Result<EvolutionConfig> {
    match hurst {
        None => EvolutionConfig::noiseless(total_time, noise.dt),
        Some(h) => EvolutionConfig::noisy(total_time, noise.dt, noise_defaults(noise).params(h)?, noise.seed),
    }
}

fn execute(command: &Command, inputs: &mut Inputs) -> Result<Product> {
    match command {
        Command::Generate { n, seed } => {
            let mut rng = substream(*seed, &[*n as u64], Purpose::Generation);
            let instance = generate_instance(*n, &mut rng)?;
            let solution = crate::ec3::satisfying_indices(&instance)[0];
            let solution = Assignment::from_index(solution, *n).to_string();
            Ok(Product {
                summary: format!(
                    "generated {n}-bit instance with {} clauses, solution |{solution}⟩",
                    instance.num_clauses()
                ),
                results: json!({ "clauses": instance.num_clauses(), "solution": solution }),
                files: vec![("instance.json".into(), serialize_instance(&instance).into_bytes())],
                failure: None,
            })
        }
        Command::Spectrum { problem, ds, levels } => {
            let hf = inputs.final_hamiltonian(problem)?;
            let hi = crate::hamiltonian::build_initial_hamiltonian(hf.n())?;
            let levels = levels.unwrap_or(DEFAULT_LEVELS.min(hf.dim()));
            let report = spectrum_scan(&hi, &hf, *ds, levels)?;
            let summary = report.summary();
            Ok(Product {
                summary: format!("gap_min {:.6} at s = {:.4}", summary.gap_min, summary.s_at_min),
                results: serde_json::to_value(&summary).unwrap_or(Value::Null),
                files: vec![("spectrum.csv".into(), csv_bytes(|b| report.write_csv(b))?)],
                failure: None,
            })
        }
        Command::Evolve { problem, total_time, hurst, noise } => {
            let problem = Problem::from_final(inputs.final_hamiltonian(problem)?)?;
            let config = evolution_config(*total_time, *hurst, noise)?;
            let result = match config.noise {
                Some(_) => run_noisy(&config, &problem.hi, &problem.hf, problem.ground_index)?,
                None => run_standard(&config, &problem.hi, &problem.hf, problem.ground_index)?,
            };
            let n = problem.n();
            let ground = Assignment::from_index(problem.ground_index, n).to_string();
            #[derive(Serialize)]
            struct Row {
                index: usize,
                assignment: String,
                probability: f64,
            }
            let rows: Vec<Row> = probability_distribution(&result.final_state)
                .into_iter()
                .enumerate()
                .map(|(index, probability)| Row {
                    index,
                    assignment: Assignment::from_index(index, n).to_string(),
                    probability,
                })
                .collect();
            Ok(Product {
                summary: format!("fidelity {:.6} to ground state |{ground}⟩", result.fidelity),
                results: json!({ "fidelity": result.fidelity, "ground_state": ground }),
                files: vec![("evolve.csv".into(), csv_bytes(|b| write_rows(&rows, b))?)],
                failure: None,
            })
        }
        Command::Sweep { instance, t_grid, hurst, realizations, noise } => {
            let problem = Problem::from_instance(&inputs.instance(instance)?)?;
            let settings = SweepSettings {
                t_grid: t_grid.0.clone(),
                h_grid: hurst.0.clone(),
                realizations: *realizations,
                dt: noise.dt,
                noise: noise_defaults(noise),
                seed: noise.seed,
            };
            let result = sweep(&problem, &settings)?;
            let best = result
                .rows()
                .into_iter()
                .filter(|r| r.sp.is_finite())
                .max_by(|a, b| a.sp.total_cmp(&b.sp));
            Ok(Product {
                summary: match &best {
                    Some(r) => format!(
                        "{} cells; best speedup {:.4} at T = {}, H = {}",
                        result.rows().len(),
                        r.sp,
                        r.t,
                        r.h
                    ),
                    None => "no complete cells".into(),
                },
                results: json!({ "cells": result.rows().len(), "best": best }),
                files: vec![("sweep.csv".into(), csv_bytes(|b| result.write_csv(b))?)],
                failure: result.failure.clone(),
            })
        }
        Command::Ensemble { instance, n, instances, total_time, hurst, realizations, noise } => {
            let list = if instance.is_empty() {
                let n = n.ok_or_else(|| Error::invalid("need --instance or --n"))?;
                scaling_instances(noise.seed, n, *instances)?
            } else {
                instance.iter().map(|p| inputs.instance(p)).collect::<Result<_>>()?
            };
            let settings = EnsembleSettings {
                dt: noise.dt,
                noise: noise_defaults(noise),
                ..EnsembleSettings::new(hurst.0.clone(), *total_time, *realizations, noise.seed)
            };
            let stats = ensemble(&list, &settings)?;
            let moments: Vec<Value> = stats
                .h_list
                .iter()
                .zip(&stats.moments)
                .map(|(h, m)| json!({ "H": h, "mean_F": m.mean, "std_F": m.std }))
                .collect();
            let summary = moments
                .iter()
                .map(|m| format!("H = {}: mean {:.4}, std {:.4}", m["H"], m["mean_F"], m["std_F"]))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Product {
                summary,
                results: json!({ "instances": list.len(), "moments": moments }),
                files: vec![
                    ("ensemble.csv".into(), csv_bytes(|b| stats.write_csv(b))?),
                    ("ensemble_baseline.csv".into(), csv_bytes(|b| stats.write_baseline_csv(b))?),
                    ("ensemble_histogram.csv".into(), csv_bytes(|b| stats.write_histogram_csv(b))?),
                ],
                failure: None,
            })
        }
        Command::Scaling { n_range, instances, total_time, hurst, realizations, noise } => {
            let settings = ScalingSettings {
                dt: noise.dt,
                noise: noise_defaults(noise),
                ..ScalingSettings::new(
                    n_range.0.clone(),
                    *instances,
                    hurst.0.clone(),
                    *total_time,
                    *realizations,
                    noise.seed,
                )
            };
            let result = scaling_study(&settings)?;
            let summary = result
                .rows
                .iter()
                .map(|r| format!("n = {}, H = {}: mean F {:.4}, mean SP {:.4}", r.n, r.h, r.mean_f, r.mean_sp))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Product {
                summary,
                results: json!({ "rows": result.rows.len() }),
                files: vec![("scaling.csv".into(), csv_bytes(|b| result.write_csv(b))?)],
                failure: None,
            })
        }
        Command::Bloch { problem, total_time, hurst, noise } => {
            let hf = inputs.final_hamiltonian(problem)?;
            let config = evolution_config(*total_time, *hurst, noise)?;
            let trajectory = bloch_trajectory(&config, &hf)?;
            let last = trajectory.points.last().copied().unwrap_or_default();
            Ok(Product {
                summary: format!(
                    "{} points; final Bloch vector ({:.4}, {:.4}, {:.4})",
                    trajectory.points.len(),
                    last[0],
                    last[1],
                    last[2]
                ),
                results: json!({ "points": trajectory.points.len(), "final": last }),
                files: vec![("bloch.csv".into(), csv_bytes(|b| trajectory.write_csv(b))?)],
                failure: None,
            })
        }
    }
}
