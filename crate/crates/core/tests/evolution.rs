use num_complex::Complex64;
use proptest::prelude::*;

use fbm_adiabatic::ec3::Ec3Instance;
use fbm_adiabatic::evolve::{initial_state, run_noisy, run_observed, EvolutionConfig, StateVector};
use fbm_adiabatic::experiments::stats::summarize;
use fbm_adiabatic::experiments::{sweep, Problem, SweepSettings};
use fbm_adiabatic::hamiltonian::{build_initial_hamiltonian, interpolate, DiagonalHamiltonian, HermitianOperator};
use fbm_adiabatic::linalg::{unitarity_defect, unitary_of_hermitian, Propagator};
use fbm_adiabatic::noise::{FbmDriver, NoiseParams, PhiMode};

fn four_bit() -> Problem {
    Problem::from_instance(&Ec3Instance::four_bit_example()).unwrap()
}

fn noisy_run(problem: &Problem, hurst: f64, mode: PhiMode, seed: u64, initial: StateVector) -> (Vec<f64>, f64) {
    let params = NoiseParams::new(hurst, 1e-3).unwrap().with_phi_mode(mode);
    let config = EvolutionConfig::noisy(1.0, 0.01, params, seed).unwrap();
    let mut driver = FbmDriver::from_substream(params, seed, &[]);
    let mut norms = Vec::new();
    let result = run_observed(
        &config,
        &problem.hi,
        &problem.hf,
        problem.ground_index,
        initial,
        Some(&mut driver),
        &mut |_, s| norms.push(s.norm()),
    )
    .unwrap();
    (norms, result.fidelity)
}

fn mode() -> impl Strategy<Value = PhiMode> {
    prop_oneof![Just(PhiMode::PerStepFresh), Just(PhiMode::ConsistentPath)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_conserved(hurst in 0.01f64..0.99, seed: u64, mode in mode()) {
        let (norms, fidelity) = noisy_run(&four_bit(), hurst, mode, seed, initial_state(4).unwrap());
        prop_assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-10));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&fidelity));
    }

    #[test]
    fn global_phase_is_invisible(hurst in 0.01f64..0.99, seed: u64, gamma in -3.0f64..3.0) {
        let problem = four_bit();
        let (_, a) = noisy_run(&problem, hurst, PhiMode::PerStepFresh, seed, initial_state(4).unwrap());
        let shifted = initial_state(4).unwrap().with_global_phase(gamma);
        let (_, b) = noisy_run(&problem, hurst, PhiMode::PerStepFresh, seed, shifted);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn runs_are_deterministic(hurst in 0.01f64..0.99, seed: u64) {
        let problem = four_bit();
        let params = NoiseParams::new(hurst, 1e-3).unwrap();
        let config = EvolutionConfig::noisy(0.5, 0.01, params, seed).unwrap();
        let a = run_noisy(&config, &problem.hi, &problem.hf, problem.ground_index).unwrap();
        let b = run_noisy(&config, &problem.hi, &problem.hf, problem.ground_index).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn step_operators_are_unitary(s in 0.0f64..=1.0, theta in -5.0f64..5.0) {
        let problem = four_bit();
        let h = interpolate(&problem.hi, &problem.hf, s).unwrap();
        prop_assert!(unitarity_defect(&unitary_of_hermitian(&h, theta).unwrap()) <= 1e-10);
    }

    #[test]
    fn complex_propagator_matches_dense(re in -1.0f64..1.0, im in -1.0f64..1.0, theta in -3.0f64..3.0) {
        let mut m = build_initial_hamiltonian(2).unwrap().entries().clone();
        m[(0, 3)] = Complex64::new(re, im);
        m[(3, 0)] = Complex64::new(re, -im);
        let h = HermitianOperator::new(m).unwrap();
        let u = unitary_of_hermitian(&h, theta).unwrap();
        prop_assert!(unitarity_defect(&u) <= 1e-10);
        let mut v: Vec<Complex64> = (0..4).map(|k| Complex64::new(0.5, 0.1 * k as f64)).collect();
        let dense = &u * nalgebra::DVector::from_column_slice(&v);
        Propagator::new(&h).unwrap().apply(theta, &mut v);
        for (a, b) in v.iter().zip(dense.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn strong_noise_beats_noiseless_baseline() {
    let problem = four_bit();
    let params = NoiseParams::new(0.01, 1e-3).unwrap();
    let fidelities: Vec<f64> = (0..100u64)
        .map(|seed| {
            let config = EvolutionConfig::noisy(2.0, 0.01, params, seed).unwrap();
            run_noisy(&config, &problem.hi, &problem.hf, problem.ground_index).unwrap().fidelity
        })
        .collect();
    let s = summarize(&fidelities).unwrap();
    assert!(s.mean - 0.257 > 2.0 * s.se, "{} ± {}", s.mean, s.se);
}

#[test]
fn standard_error_halves_with_four_times_the_realizations() {
    let problem = four_bit();
    let se = |r: usize| {
        let settings = SweepSettings::new(vec![2.0], vec![0.2], r, 8);
        sweep(&problem, &settings).unwrap().std_error[0][0]
    };
    let ratio = se(50) / se(200);
    assert!((1.5..2.7).contains(&ratio), "{ratio}");
}

#[test]
fn white_and_smooth_noise_trail_rough_noise() {
    let problem = four_bit();
    let settings = SweepSettings::new(vec![1.0, 2.0, 3.0], vec![0.1, 0.5, 0.75, 0.9], 100, 21);
    let r = sweep(&problem, &settings).unwrap();
    for (i, row) in r.speedup.iter().enumerate() {
        for sp in &row[1..] {
            assert!(*sp < row[0], "T = {}: {row:?}", r.t_grid[i]);
        }
    }
}

#[test]
fn silent_sweep_has_unit_speedup_everywhere() {
    let mut settings = SweepSettings::new(vec![1.0, 2.0], vec![0.05, 0.5], 1, 0);
    settings.noise.silent = true;
    let r = sweep(&four_bit(), &settings).unwrap();
    assert!(r.speedup.iter().flatten().all(|&sp| sp == 1.0));
}

#[test]
fn single_qubit_is_adiabatic_at_long_times() {
    let hf = DiagonalHamiltonian::from_diagonal(vec![1.5, -1.5]).unwrap();
    let problem = Problem::from_final(hf).unwrap();
    let config = EvolutionConfig::noiseless(100.0, 0.001).unwrap();
    let r = fbm_adiabatic::evolve::run_standard(&config, &problem.hi, &problem.hf, problem.ground_index).unwrap();
    assert!(r.fidelity > 0.99, "{}", r.fidelity);
    let u = Propagator::new(&interpolate(&problem.hi, &problem.hf, 0.3).unwrap()).unwrap().unitary(0.7);
    assert_eq!(u.shape(), (2, 2));
    assert!(unitarity_defect(&u) < 1e-14);
}
