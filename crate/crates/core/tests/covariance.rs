//! Linearity, translation and rotation covariance, speed-tuning law and
//! separability.

use std::f64::consts::PI;

use gcm_core::kernels::{magnitude_argmax, TunedGcm, SPEED_EXPONENT_P, SPEED_EXPONENT_Q};
use gcm_core::speedscan::{ScanConfig, SpeedScanner};
use gcm_core::stcwt::{apply_tuned_filter, forward_fft3, FrequencyGrid, SpectralFilter};
use gcm_core::synth::{generate, GaussianSceneSpec};
use gcm_core::{GcmParams, GroupElement, SequenceVolume, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_volume(nx: usize, ny: usize, nt: usize, seed: u64) -> SequenceVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..nx * ny * nt).map(|_| rng.random_range(-1.0..1.0)).collect();
    SequenceVolume::new(nx, ny, nt, data).unwrap()
}

fn tuning() -> GroupElement {
    GroupElement::tuning(0.2, 2.0, 2.0, 1.3)
}

#[test]
fn transform_is_linear() {
    let (a, b) = (random_volume(16, 12, 8, 1), random_volume(16, 12, 8, 2));
    let mix: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| 2.5 * x - 0.75 * y).collect();
    let mix = SequenceVolume::new(16, 12, 8, mix).unwrap();
    let p = GcmParams::default();
    let w = |s: &SequenceVolume| apply_tuned_filter(&forward_fft3(s).unwrap(), &tuning(), &p, false).unwrap();
    let (wa, wb, wm) = (w(&a), w(&b), w(&mix));
    let scale = wm.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..wm.data().len() {
        let expect = wa.data()[i] * 2.5 - wb.data()[i] * 0.75;
        assert!((wm.data()[i] - expect).norm() <= 1e-12 * scale);
    }
}

#[test]
fn circular_translation_covariance() {
    let seq = random_volume(16, 16, 8, 3);
    let (dx, dy, dt) = (5isize, -3isize, 2isize);
    let shifted = seq.circular_shift(dx, dy, dt);
    let p = GcmParams::default();
    let w0 = apply_tuned_filter(&forward_fft3(&seq).unwrap(), &tuning(), &p, true).unwrap();
    let w1 = apply_tuned_filter(&forward_fft3(&shifted).unwrap(), &tuning(), &p, true).unwrap();
    let scale = w0.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let m = |i: isize, n: usize| (i.rem_euclid(n as isize)) as usize;
    for t in 0..8 {
        for y in 0..16 {
            for x in 0..16 {
                let a = w1.get(x, y, t);
                let b = w0.get(
                    m(x as isize - dx, 16),
                    m(y as isize - dy, 16),
                    m(t as isize - dt, 8),
                );
                assert!((a - b).norm() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn rotation_covariance_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = GcmParams::default();
    let base = TunedGcm::new(GroupElement::tuning(0.0, 0.7, 0.9, 1.7), p).unwrap();
    for _ in 0..100 {
        let phi = rng.random_range(-PI..PI);
        let rotated = TunedGcm::new(GroupElement::tuning(phi, 0.7, 0.9, 1.7), p).unwrap();
        // inside the cone (edges at +-pi/16) but clear of the edge rays,
        // where (k . e)^l amplifies rotation rounding
        let local = Vec2::from_polar(rng.random_range(2.0..9.0), rng.random_range(-0.15..0.15));
        let k = local.rotate(phi);
        let w = rng.random_range(0.0..12.0);
        let a = rotated.eval(k, w);
        let b = base.eval(local, w);
        let scale = a.norm().max(b.norm()).max(1e-300);
        assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");

        let outside = Vec2::from_polar(rng.random_range(0.5..9.0), rng.random_range(0.25..6.0));
        assert_eq!(rotated.eval(outside.rotate(phi), w).norm(), 0.0);
        assert_eq!(base.eval(outside, w).norm(), 0.0);
    }
}

#[test]
fn speed_tuning_moves_centers_by_the_power_law() {
    let p = GcmParams::default();
    let (a_s, a_t) = (1.5, 2.0);
    for c in [0.4, 1.0, 4.0] {
        let f = TunedGcm::new(GroupElement::tuning(0.0, a_s, a_t, c), p).unwrap();
        let radial = p.radial_center() / (a_s * c.powf(SPEED_EXPONENT_Q));
        let temporal = p.omega0 * c.powf(SPEED_EXPONENT_P) / a_t;

        let step = 1e-3;
        let k = magnitude_argmax(|k| f.spatial(k), radial * 1.5, step);
        assert!((k.norm() - radial).abs() <= step, "c={c}: {} vs {radial}", k.norm());

        let best = (0..40_000)
            .map(|i| i as f64 * step)
            .fold((0.0, f64::MIN), |acc, w| {
                let v = f.temporal(w);
                if v > acc.1 {
                    (w, v)
                } else {
                    acc
                }
            });
        assert!((best.0 - temporal).abs() <= step, "c={c}: {} vs {temporal}", best.0);
    }
}

#[test]
fn mirror_symmetry_of_orientation_energy() {
    let spec = GaussianSceneSpec {
        nx: 32,
        ny: 32,
        nt: 16,
        sigma_y: 3.0,
        pattern_angle: 0.3,
        motion_angle: 0.2,
        ..GaussianSceneSpec::benchmark(2.0)
    };
    let seq = generate(&spec).unwrap();
    let a = SpeedScanner::new(&seq).unwrap();
    let b = SpeedScanner::new(&seq.mirror_y()).unwrap();
    let cfg = ScanConfig::default();
    for theta in [0.1, 0.4, 1.2] {
        for c in [1.0, 2.0, 3.5] {
            let ea = a.energy(&ScanConfig { theta, ..cfg.clone() }, c).unwrap();
            let eb = b.energy(&ScanConfig { theta: -theta, ..cfg.clone() }, c).unwrap();
            assert!((ea - eb).abs() <= 1e-8 * ea.max(eb), "theta={theta} c={c}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separable_sampling_matches_pointwise(
        nx in 2usize..12, ny in 2usize..12, nt in 2usize..10,
        theta in -3.0f64..3.0, a_s in 0.3f64..3.0, a_t in 0.3f64..3.0, c in 0.3f64..5.0,
        bx in -4.0f64..4.0, by in -4.0f64..4.0, tau in -3.0f64..3.0,
    ) {
        let g = GroupElement { b: Vec2::new(bx, by), tau, ..GroupElement::tuning(theta, a_s, a_t, c) };
        let f = TunedGcm::new(g, GcmParams::default()).unwrap();
        let grid = FrequencyGrid::new(nx, ny, nt);
        let fast = f.sample(&grid);
        let slow = grid.sample(|k, w| f.eval(k, w));
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }
}
