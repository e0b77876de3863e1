//! Speed-scan properties on travelling-Gaussian scenes.

use std::f64::consts::FRAC_PI_2;

use gcm_core::speedscan::{scan_speeds, Refine, ScanConfig, SpeedScanner};
use gcm_core::synth::{add_noise, generate, noise_sigma_for_snr, GaussianSceneSpec};
use proptest::prelude::*;

#[test]
fn benchmark_speed_and_refinement() {
    let seq = generate(&GaussianSceneSpec::benchmark(3.0)).unwrap();
    let scanner = SpeedScanner::new(&seq).unwrap();
    let grid = scanner.scan(&ScanConfig::default()).unwrap();
    assert!((grid.v_m - 3.0).abs() <= 0.25);
    let refined = scanner
        .scan(&ScanConfig {
            refine: Refine::golden(),
            ..ScanConfig::default()
        })
        .unwrap();
    assert!((refined.v_m - 3.0).abs() <= 0.05, "{}", refined.v_m);
    assert!(refined.peak_energy >= grid.peak_energy);
    assert_eq!(scanner.fft().forward_calls(), 1);
}

#[test]
fn v_m_is_invariant_under_amplitude_scaling() {
    let seq = generate(&GaussianSceneSpec::benchmark(2.4)).unwrap();
    let cfg = ScanConfig::default();
    let base = scan_speeds(&seq, &cfg).unwrap();
    for gain in [1e-3, 7.5, 250.0] {
        let scaled = seq.map(|v| v * gain).unwrap();
        assert_eq!(scan_speeds(&scaled, &cfg).unwrap().v_m, base.v_m, "gain {gain}");
    }
}

#[test]
fn orthogonal_orientation_captures_far_less() {
    let seq = generate(&GaussianSceneSpec::benchmark(3.0)).unwrap();
    let scanner = SpeedScanner::new(&seq).unwrap();
    let aligned = scanner.scan(&ScanConfig::default()).unwrap();
    let across = scanner
        .scan(&ScanConfig {
            theta: FRAC_PI_2,
            ..ScanConfig::default()
        })
        .unwrap();
    assert!(across.peak_energy * 10.0 <= aligned.peak_energy);
}

#[test]
fn noise_robustness_at_10_db() {
    let clean = generate(&GaussianSceneSpec::benchmark(3.0)).unwrap();
    let sigma = noise_sigma_for_snr(&clean, 10.0);
    let cfg = ScanConfig::default();
    for seed in 0..10 {
        let noisy = add_noise(&clean, sigma, seed).unwrap();
        let curve = scan_speeds(&noisy, &cfg).unwrap();
        assert!(
            (curve.v_m - 3.0).abs() <= 2.0 * cfg.c_step,
            "seed {seed}: v_m = {}",
            curve.v_m
        );
    }
}

#[test]
fn static_scene_reports_no_motion() {
    let seq = generate(&GaussianSceneSpec::benchmark(0.0)).unwrap();
    assert!(scan_speeds(&seq, &ScanConfig::default()).unwrap().no_motion);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // above 4 px/frame the sigma_x = 1 pattern aliases temporally; see aliased_speed_keeps_interior_peak
    #[test]
    fn recovers_grid_speeds(j in 2usize..13) {
        let v = 1.0 + 0.25 * j as f64;
        let seq = generate(&GaussianSceneSpec::benchmark(v)).unwrap();
        let curve = scan_speeds(&seq, &ScanConfig::default()).unwrap();
        prop_assert!(!curve.no_motion);
        prop_assert!((curve.v_m - v).abs() <= 0.25, "v = {v}, v_m = {}", curve.v_m);
    }

    #[test]
    fn curve_is_well_formed(v in 0.5f64..5.5, step in 0.1f64..0.6) {
        let seq = generate(&GaussianSceneSpec { nx: 32, ny: 32, nt: 8, sigma_y: 4.0, ..GaussianSceneSpec::benchmark(v) }).unwrap();
        let cfg = ScanConfig { c_step: step, ..ScanConfig::default() };
        let curve = scan_speeds(&seq, &cfg).unwrap();
        prop_assert!(curve.samples.windows(2).all(|w| w[0].c < w[1].c));
        prop_assert!(curve.samples.iter().all(|s| s.energy >= 0.0 && s.energy.is_finite()));
        prop_assert!(curve.samples.iter().any(|s| s.c == curve.grid_peak.c));
        prop_assert!(curve.samples.iter().all(|s| s.energy <= curve.peak_energy));
    }
}

#[test]
fn aliased_speed_keeps_interior_peak() {
    for v in [4.5, 4.75] {
        let seq = generate(&GaussianSceneSpec::benchmark(v)).unwrap();
        let curve = scan_speeds(&seq, &ScanConfig::default()).unwrap();
        let e: Vec<f64> = curve.samples.iter().map(|s| s.energy).collect();
        let interior = (1..e.len() - 1)
            .filter(|&i| e[i] >= e[i - 1] && e[i] >= e[i + 1])
            .map(|i| curve.samples[i].c)
            .collect::<Vec<_>>();
        assert_eq!(interior.len(), 1, "v = {v}: local maxima at {interior:?}");
        assert!((interior[0] - v).abs() <= 0.5, "v = {v}: interior peak at {}", interior[0]);
        // the wrapped spectral line dominates the slowest tuning
        assert!(e[0] > e[1], "v = {v}: expected an aliased edge peak");
    }
}

