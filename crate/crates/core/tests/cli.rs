use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fbm_adiabatic::ec3::parse_instance;
use fbm_adiabatic::experiments::{read_bloch_csv, read_ensemble_csv, read_scaling_csv, read_sweep_csv};
use fbm_adiabatic::hamiltonian::SpectrumReport;

const BIN: &str = env!("CARGO_BIN_EXE_fbm-adiabatic");

fn bundled() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/four_bit.json")
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove(fbm_adiabatic::cli::OUTPUT_DIR_ENV)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{name}.manifest.json"))).unwrap()).unwrap()
}

#[test]
fn evolve_reports_benchmark_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["evolve", "--instance", bundled().to_str().unwrap(), "--T", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let f: f64 = text.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((f - 0.257).abs() < 0.015, "{text}");
    assert!(text.contains("|1000⟩"));
    let m = manifest(dir.path(), "evolve");
    assert_eq!(m["complete"], true);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn generate_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(dir.path(), &["generate", "--n", "6", "--seed", "11"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let x = std::fs::read(a.path().join("instance.json")).unwrap();
    let y = std::fs::read(b.path().join("instance.json")).unwrap();
    assert_eq!(x, y);
    let instance = parse_instance(std::str::from_utf8(&x).unwrap()).unwrap();
    assert_eq!(instance.n(), 6);
    assert_eq!(fbm_adiabatic::ec3::count_satisfying(&instance), 1);
}

#[test]
fn bloch_rejects_multi_qubit_instances() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bloch", "--instance", bundled().to_str().unwrap(), "--T", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bloch requires a single-qubit system"));
    let m = manifest(dir.path(), "bloch");
    assert_eq!(m["complete"], false);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(dir.path(), &["sweep", "--T", "1", "--hurst", "0.1"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("--instance"));

    let bad = run(dir.path(), &["sweep", "--instance", "f.json", "--T", "1", "--hurst", "1.2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("--hurst"));

    let unknown = run(dir.path(), &["evolve", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));

    let help = run(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["evolve", "--instance", "/nonexistent/instance.json", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["spectrum", "--diagonal", "1.5,-1.5", "--ds", "0.01"])
        .env(fbm_adiabatic::cli::OUTPUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn outputs_round_trip_through_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = bundled();
    let inst = inst.to_str().unwrap();
    let commands: [&[&str]; 5] = [
        &["spectrum", "--instance", inst, "--ds", "0.01", "--levels", "4"],
        &["sweep", "--instance", inst, "--T", "0.5:1:0.5", "--hurst", "0.1,0.6", "--realizations", "5"],
        &["ensemble", "--instance", inst, "--instance", inst, "--T", "1", "--hurst", "0.2", "--realizations", "3"],
        &["scaling", "--n-range", "4:5:1", "--instances", "2", "--T", "1", "--hurst", "0.1", "--realizations", "3"],
        &["bloch", "--diagonal", "1.5,-1.5", "--T", "1", "--hurst", "0.3", "--seed", "4"],
    ];
    for args in commands {
        let o = run(d, args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert_eq!(manifest(d, args[0])["complete"], true);
    }
    let open = |name: &str| std::fs::File::open(d.join(name)).unwrap();

    let spectrum = SpectrumReport::read_csv(open("spectrum.csv")).unwrap();
    assert_eq!(spectrum.levels[0].len(), 4);
    assert_eq!(spectrum.s_grid.len(), 101);

    let sweep = read_sweep_csv(open("sweep.csv")).unwrap();
    assert_eq!(sweep.len(), 4);
    assert!(sweep.iter().all(|r| (r.sp - r.mean_f / r.f0).abs() < 1e-12));

    let ensemble = read_ensemble_csv(open("ensemble.csv")).unwrap();
    assert_eq!(ensemble.len(), 2);
    // the same instance twice gets different substreams
    assert_ne!(ensemble[0].mean_f, ensemble[1].mean_f);

    let scaling = read_scaling_csv(open("scaling.csv")).unwrap();
    assert_eq!(scaling.iter().map(|r| r.n).collect::<Vec<_>>(), vec![4, 5]);

    let bloch = read_bloch_csv(open("bloch.csv")).unwrap();
    assert_eq!(bloch.len(), 101);
    assert!(bloch.iter().all(|p| (p.x * p.x + p.y * p.y + p.z * p.z - 1.0).abs() < 1e-9));
}

#[test]
fn reruns_differ_only_in_wall_time() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let inst = bundled();
    let args = ["sweep", "--instance", inst.to_str().unwrap(), "--T", "1", "--hurst", "0.2", "--realizations", "4", "--seed", "9"];
    for dir in [&a, &b] {
        assert!(run(dir.path(), &args).status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("sweep.csv")).unwrap(),
        std::fs::read(b.path().join("sweep.csv")).unwrap()
    );
    let strip = |dir: &Path| {
        let mut m = manifest(dir, "sweep");
        m.as_object_mut().unwrap().remove("wall_time_seconds");
        m["config"].as_object_mut().unwrap().remove("out");
        m
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}
