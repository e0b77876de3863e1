//! Speed, orientation and aperture sweeps over the tuned GCM family.
//!
//! The input spectrum is computed once per [`SpeedScanner`]; every sample of
//! every sweep reuses it. When the energy is summed over all frames it is
//! evaluated on the Fourier side (`sum |psi|^2 |s|^2`) and no inverse
//! transform is needed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{GcmParams, GroupElement, TunedGcm};
use crate::search::golden_section_max;
use crate::stcwt::{
    apply_filter_with, energy_density, parseval_energy, Fft3, FrameRange, GcmFilter,
    SequenceVolume, SpectrumVolume,
};

/// Curves whose max/min energy ratio is below `1 + FLAT_RATIO` carry no
/// speed information.
pub const FLAT_RATIO: f64 = 1e-9;

/// Peak energies below this fraction of `|s|^2 * max|psi|^2` mean that the
/// filter family captured none of the signal (e.g. a static scene, whose
/// spectrum sits on the `omega = 0` plane).
pub const MIN_CAPTURE: f64 = 1e-6;

/// Default golden-section tolerance in pixels/frame.
pub const DEFAULT_REFINE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum Refine {
    #[default]
    None,
    /// Golden-section search within one step of the grid peak.
    GoldenSection { tol: f64 },
}

impl Refine {
    pub fn golden() -> Self {
        Refine::GoldenSection {
            tol: DEFAULT_REFINE_TOL,
        }
    }
}

/// Which route computes an energy sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyPath {
    /// Fourier side when all frames are selected, inverse transform otherwise.
    #[default]
    Auto,
    /// Always the Fourier-side sum; requires all frames.
    Fourier,
    /// Always filter, inverse-transform and sum the selected frames.
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub c_min: f64,
    pub c_max: f64,
    pub c_step: f64,
    /// Wavelet orientation (radians).
    pub theta: f64,
    pub a_s: f64,
    pub a_t: f64,
    /// Wavelet shape; the aperture is `params.cone.alpha`.
    pub params: GcmParams,
    pub frame_range: FrameRange,
    pub refine: Refine,
}

impl Default for ScanConfig {
    /// Speeds 1..6 step 0.25, `theta = 0`, `a_s = a_t = 3`, aperture `pi/16`,
    /// `l = m = 10`, `sigma = 1`, all frames, no refinement.
    fn default() -> Self {
        Self {
            c_min: 1.0,
            c_max: 6.0,
            c_step: 0.25,
            theta: 0.0,
            a_s: 3.0,
            a_t: 3.0,
            params: GcmParams::default(),
            frame_range: FrameRange::All,
            refine: Refine::None,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_min > 0.0 && self.c_min.is_finite()) {
            return Err(invalid("c_min", format!("{} is not positive", self.c_min)));
        }
        if !(self.c_max > self.c_min && self.c_max.is_finite()) {
            return Err(invalid("c_max", format!("{} is not above c_min", self.c_max)));
        }
        if !(self.c_step > 0.0 && self.c_step.is_finite()) {
            return Err(invalid("c_step", format!("{} is not positive", self.c_step)));
        }
        let n = self.speeds().len();
        if n < 3 {
            return Err(invalid(
                "c_step",
                format!("range [{}, {}] holds only {n} samples, need 3", self.c_min, self.c_max),
            ));
        }
        if let Refine::GoldenSection { tol } = self.refine {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(invalid("refine", "tolerance must be positive"));
            }
        }
        GroupElement::tuning(self.theta, self.a_s, self.a_t, self.c_min).validate()?;
        self.params.validate()
    }

    /// The speed grid `c_min + j c_step` up to `c_max`.
    pub fn speeds(&self) -> Vec<f64> {
        if !(self.c_step > 0.0) || !(self.c_max >= self.c_min) {
            return Vec::new();
        }
        let n = ((self.c_max - self.c_min) / self.c_step + 1e-9).floor() as usize + 1;
        (0..n).map(|j| self.c_min + j as f64 * self.c_step).collect()
    }

    fn tuning(&self, c: f64) -> GroupElement {
        GroupElement::tuning(self.theta, self.a_s, self.a_t, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub c: f64,
    pub energy: f64,
}

/// `c -> E_tot(c)` with its located peak `v_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    /// Strictly increasing in `c`.
    pub samples: Vec<EnergySample>,
    /// Measured speed (refined when requested).
    pub v_m: f64,
    pub peak_energy: f64,
    /// Best grid sample before refinement.
    pub grid_peak: EnergySample,
    /// Set when the curve is flat or captures no signal energy.
    pub no_motion: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationSample {
    pub theta: f64,
    pub v_m: f64,
    pub peak_energy: f64,
    pub no_motion: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureSample {
    pub alpha: f64,
    pub v_m: f64,
    pub peak_energy: f64,
    pub no_motion: bool,
}

/// A sequence prepared for repeated speed analysis.
#[derive(Debug)]
pub struct SpeedScanner {
    fft: Fft3,
    spectrum: SpectrumVolume,
    input_energy: f64,
    path: EnergyPath,
}

impl SpeedScanner {
    pub fn new(seq: &SequenceVolume) -> Result<Self> {
        let (nx, ny, nt) = seq.dims();
        let fft = Fft3::new(nx, ny, nt);
        let spectrum = fft.forward(seq)?;
        Ok(Self {
            input_energy: spectrum.energy(),
            fft,
            spectrum,
            path: EnergyPath::Auto,
        })
    }

    pub fn with_path(mut self, path: EnergyPath) -> Self {
        self.path = path;
        self
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn spectrum(&self) -> &SpectrumVolume {
        &self.spectrum
    }

    /// `E_tot` for the tuning `c` of `config`.
    pub fn energy(&self, config: &ScanConfig, c: f64) -> Result<f64> {
        let g = config.tuning(c);
        let filter = TunedGcm::new(g, config.params)?;
        let nt = self.spectrum.dims().2;
        let all = config.frame_range.covers_all(nt);
        let fourier = match self.path {
            EnergyPath::Auto => all,
            EnergyPath::Fourier if !all => {
                return Err(invalid(
                    "frame_range",
                    "the Fourier-side energy needs every frame selected",
                ))
            }
            EnergyPath::Fourier => true,
            EnergyPath::Inverse => false,
        };
        if fourier {
            Ok(parseval_energy(&self.spectrum, &filter))
        } else {
            let coeffs = apply_filter_with(&self.fft, &self.spectrum, &filter, g)?;
            energy_density(&coeffs, &config.frame_range)
        }
    }

    pub fn scan(&self, config: &ScanConfig) -> Result<EnergyCurve> {
        config.validate()?;
        config.frame_range.resolve(self.spectrum.dims().2)?;
        let speeds = config.speeds();
        let energies = speeds
            .par_iter()
            .map(|&c| self.energy(config, c))
            .collect::<Result<Vec<f64>>>()?;
        let samples: Vec<EnergySample> = speeds
            .iter()
            .zip(&energies)
            .map(|(&c, &energy)| EnergySample { c, energy })
            .collect();

        // ties go to the smaller c
        let mut grid_peak = samples[0];
        for s in &samples[1..] {
            if s.energy > grid_peak.energy {
                grid_peak = *s;
            }
        }

        let (mut v_m, mut peak_energy) = (grid_peak.c, grid_peak.energy);
        if let Refine::GoldenSection { tol } = config.refine {
            let lo = (grid_peak.c - config.c_step).max(config.c_min);
            let hi = (grid_peak.c + config.c_step).min(config.c_max);
            let failure = Mutex::new(None);
            let best = golden_section_max(
                |c| match self.energy(config, c) {
                    Ok(e) => e,
                    Err(e) => {
                        failure.lock().unwrap().get_or_insert(e);
                        f64::NEG_INFINITY
                    }
                },
                lo,
                hi,
                tol,
            );
            if let Some(e) = failure.into_inner().unwrap() {
                return Err(e);
            }
            if best.value >= peak_energy {
                v_m = best.x;
                peak_energy = best.value;
            }
        }

        let no_motion = self.is_flat(config, &energies, grid_peak)?;
        Ok(EnergyCurve {
            samples,
            v_m,
            peak_energy,
            grid_peak,
            no_motion,
        })
    }

    fn is_flat(&self, config: &ScanConfig, energies: &[f64], peak: EnergySample) -> Result<bool> {
        let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || (min > 0.0 && max / min < 1.0 + FLAT_RATIO) {
            return Ok(true);
        }
        let nt = self.spectrum.dims().2;
        let frames = config.frame_range.resolve(nt)?.len() as f64 / nt as f64;
        let gain = GcmFilter::new(config.tuning(peak.c), config.params, false)?.peak_gain();
        Ok(peak.energy < MIN_CAPTURE * self.input_energy * gain * frames)
    }

    /// One speed scan per wavelet orientation.
    pub fn scan_orientations(
        &self,
        config: &ScanConfig,
        thetas: &[f64],
    ) -> Result<Vec<OrientationSample>> {
        thetas
            .iter()
            .map(|&theta| {
                let cfg = ScanConfig {
                    theta,
                    ..config.clone()
                };
                let curve = self.scan(&cfg)?;
                Ok(OrientationSample {
                    theta,
                    v_m: curve.v_m,
                    peak_energy: curve.peak_energy,
                    no_motion: curve.no_motion,
                })
            })
            .collect()
    }

    /// One speed scan per cone half-aperture.
    pub fn aperture_sweep(&self, config: &ScanConfig, alphas: &[f64]) -> Result<Vec<ApertureSample>> {
        if let Some(&a) = alphas.iter().find(|&&a| !(a > 0.0 && a < FRAC_PI_2)) {
            return Err(invalid("alpha", format!("{a} is not in (0, pi/2)")));
        }
        alphas
            .iter()
            .map(|&alpha| {
                let mut cfg = config.clone();
                cfg.params.cone.alpha = alpha;
                let curve = self.scan(&cfg)?;
                Ok(ApertureSample {
                    alpha,
                    v_m: curve.v_m,
                    peak_energy: curve.peak_energy,
                    no_motion: curve.no_motion,
                })
            })
            .collect()
    }
}

pub fn scan_speeds(seq: &SequenceVolume, config: &ScanConfig) -> Result<EnergyCurve> {
    SpeedScanner::new(seq)?.scan(config)
}

pub fn scan_orientations(
    seq: &SequenceVolume,
    config: &ScanConfig,
    thetas: &[f64],
) -> Result<Vec<OrientationSample>> {
    SpeedScanner::new(seq)?.scan_orientations(config, thetas)
}

pub fn aperture_sweep(
    seq: &SequenceVolume,
    config: &ScanConfig,
    alphas: &[f64],
) -> Result<Vec<ApertureSample>> {
    SpeedScanner::new(seq)?.aperture_sweep(config, alphas)
}

/// `count` evenly spaced orientations from `-pi/2` to `pi/2` inclusive.
pub fn half_turn(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|i| -FRAC_PI_2 + PI * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, GaussianSceneSpec};

    fn small_scene(v: f64) -> SequenceVolume {
        generate(&GaussianSceneSpec {
            nx: 32,
            ny: 32,
            nt: 16,
            sigma_y: 4.0,
            ..GaussianSceneSpec::benchmark(v)
        })
        .unwrap()
    }

    #[test]
    fn speed_grid() {
        let cfg = ScanConfig::default();
        let s = cfg.speeds();
        assert_eq!(s.len(), 21);
        assert_eq!(s[0], 1.0);
        assert_eq!(s[20], 6.0);
        let bad = ScanConfig {
            c_step: 3.0,
            ..ScanConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScanConfig {
            c_min: 0.0,
            ..ScanConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScanConfig {
            c_max: 0.5,
            ..ScanConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn finds_speed_on_small_scene() {
        let curve = scan_speeds(&small_scene(3.0), &ScanConfig::default()).unwrap();
        assert!(!curve.no_motion);
        assert!((curve.v_m - 3.0).abs() <= 0.25, "{}", curve.v_m);
        assert!(curve.samples.windows(2).all(|w| w[0].c < w[1].c));
        assert!(curve.samples.iter().all(|s| s.energy >= 0.0));
    }

    #[test]
    fn refinement_stays_near_grid_peak() {
        let cfg = ScanConfig {
            refine: Refine::golden(),
            ..ScanConfig::default()
        };
        let curve = scan_speeds(&small_scene(2.6), &cfg).unwrap();
        assert!((curve.v_m - curve.grid_peak.c).abs() <= cfg.c_step);
        assert!(curve.peak_energy >= curve.grid_peak.energy);
    }

    #[test]
    fn zero_sequence_is_flat() {
        let seq = SequenceVolume::zeros(16, 16, 8).unwrap();
        let curve = scan_speeds(&seq, &ScanConfig::default()).unwrap();
        assert!(curve.no_motion);
        assert_eq!(curve.v_m, 1.0);
    }

    #[test]
    fn static_scene_is_flagged() {
        let curve = scan_speeds(&small_scene(0.0), &ScanConfig::default()).unwrap();
        assert!(curve.no_motion);
    }

    #[test]
    fn auto_path_matches_inverse_path() {
        let seq = small_scene(3.0);
        let fourier = SpeedScanner::new(&seq).unwrap();
        let inverse = SpeedScanner::new(&seq).unwrap().with_path(EnergyPath::Inverse);
        let cfg = ScanConfig::default();
        for c in [1.0, 2.5, 4.0] {
            let a = fourier.energy(&cfg, c).unwrap();
            let b = inverse.energy(&cfg, c).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.max(b));
        }
        assert_eq!(fourier.fft().inverse_calls(), 0);
        assert_eq!(inverse.fft().inverse_calls(), 3);
    }

    #[test]
    fn forced_fourier_path_needs_all_frames() {
        let scanner = SpeedScanner::new(&small_scene(1.0))
            .unwrap()
            .with_path(EnergyPath::Fourier);
        let cfg = ScanConfig {
            frame_range: FrameRange::Frames(vec![0, 1]),
            ..ScanConfig::default()
        };
        assert!(scanner.energy(&cfg, 2.0).is_err());
    }

    #[test]
    fn frame_subset_scan() {
        let cfg = ScanConfig {
            frame_range: FrameRange::Frames((4..12).collect()),
            ..ScanConfig::default()
        };
        let curve = scan_speeds(&small_scene(3.0), &cfg).unwrap();
        assert!((curve.v_m - 3.0).abs() <= 0.5, "{}", curve.v_m);
        let bad = ScanConfig {
            frame_range: FrameRange::Frames(vec![99]),
            ..ScanConfig::default()
        };
        assert!(scan_speeds(&small_scene(3.0), &bad).is_err());
    }

    #[test]
    fn single_aperture_sweep_equals_scan() {
        let seq = small_scene(3.0);
        let scanner = SpeedScanner::new(&seq).unwrap();
        let cfg = ScanConfig::default();
        let curve = scanner.scan(&cfg).unwrap();
        let sweep = scanner.aperture_sweep(&cfg, &[cfg.params.cone.alpha]).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].v_m, curve.v_m);
        assert_eq!(sweep[0].peak_energy, curve.peak_energy);
        assert!(scanner.aperture_sweep(&cfg, &[FRAC_PI_2]).is_err());
        assert_eq!(scanner.fft().forward_calls(), 1);
    }

    #[test]
    fn half_turn_grid() {
        let t = half_turn(33);
        assert_eq!(t.len(), 33);
        assert!((t[0] + FRAC_PI_2).abs() < 1e-15);
        assert!(t[16].abs() < 1e-15);
        assert!((t[32] - FRAC_PI_2).abs() < 1e-15);
    }
}
