use fbm_adiabatic::experiments::{ensemble, scaling_instances, EnsembleSettings};

#[test]
fn rough_noise_shifts_and_spreads_the_fidelity_distribution() {
    let instances = scaling_instances(2024, 8, 20).unwrap();
    let settings = EnsembleSettings::new(vec![0.5, 0.25, 0.01], 2.0, 50, 2024);
    let stats = ensemble(&instances, &settings).unwrap();
    let means: Vec<f64> = stats.moments.iter().map(|m| m.mean).collect();
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
    assert!(stats.moments[2].std > stats.moments[0].std, "{:?}", stats.moments);
    assert!(stats.histograms.iter().all(|h| h.total() == 20));
}
