//! Travelling-Gaussian test sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::Vec2;
use crate::stcwt::SequenceVolume;

/// A rotated anisotropic Gaussian moving at constant velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSceneSpec {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    /// Width along the pattern's first principal axis (pixels).
    pub sigma_x: f64,
    /// Width along the second principal axis (pixels).
    pub sigma_y: f64,
    /// Orientation of the first principal axis (radians).
    pub pattern_angle: f64,
    /// Speed in pixels/frame.
    pub v_r: f64,
    /// Direction of travel (radians).
    pub motion_angle: f64,
    /// Center at frame 0; `None` means the volume center `(nx/2, ny/2)`.
    pub start: Option<Vec2>,
    pub amplitude: f64,
    /// Standard deviation of additive white noise; 0 disables it.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Periodic wrap-around of the pattern at the volume edges.
    pub wrap: bool,
}

impl Default for GaussianSceneSpec {
    fn default() -> Self {
        Self::benchmark(3.0)
    }
}

impl GaussianSceneSpec {
    /// Desk-scale benchmark: 64x64x16, `sigma_x = 1`, `sigma_y = 8`, motion
    /// along +x, wrapping at the edges.
    pub fn benchmark(v_r: f64) -> Self {
        Self {
            nx: 64,
            ny: 64,
            nt: 16,
            sigma_x: 1.0,
            sigma_y: 8.0,
            pattern_angle: 0.0,
            v_r,
            motion_angle: 0.0,
            start: None,
            amplitude: 1.0,
            noise_sigma: 0.0,
            seed: 0,
            wrap: true,
        }
    }

    /// The full 128x128x32 scene.
    pub fn full_scale(v_r: f64) -> Self {
        Self {
            nx: 128,
            ny: 128,
            nt: 32,
            ..Self::benchmark(v_r)
        }
    }

    pub fn start_point(&self) -> Vec2 {
        self.start
            .unwrap_or(Vec2::new(self.nx as f64 / 2.0, self.ny as f64 / 2.0))
    }

    /// Pattern center at frame `t`.
    pub fn center(&self, t: usize) -> Vec2 {
        self.start_point() + Vec2::from_polar(self.v_r * t as f64, self.motion_angle)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nt < 2 {
            return Err(Error::InvalidVolume(format!(
                "every dimension must be at least 2, got {}x{}x{}",
                self.nx, self.ny, self.nt
            )));
        }
        for (name, v) in [("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if !(self.v_r >= 0.0 && self.v_r.is_finite()) {
            return Err(invalid("v_r", format!("{} is negative or not finite", self.v_r)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma", "must be non-negative"));
        }
        let finite = [self.pattern_angle, self.motion_angle, self.amplitude];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spec", "angles and amplitude must be finite"));
        }
        if !self.wrap {
            let margin = 3.0 * self.sigma_x.max(self.sigma_y);
            for t in 0..self.nt {
                let c = self.center(t);
                let inside = c.x >= margin
                    && c.x <= (self.nx - 1) as f64 - margin
                    && c.y >= margin
                    && c.y <= (self.ny - 1) as f64 - margin;
                if !inside {
                    return Err(Error::TrajectoryOutOfBounds {
                        frame: t,
                        center: [c.x, c.y],
                    });
                }
            }
        }
        Ok(())
    }
}

/// Renders the scene. Each pixel center `(x, y)` (integer coordinates)
/// receives the analytic Gaussian, so sub-pixel displacements are exact.
pub fn generate(spec: &GaussianSceneSpec) -> Result<SequenceVolume> {
    spec.validate()?;
    let (nx, ny, nt) = (spec.nx, spec.ny, spec.nt);
    let plane = nx * ny;
    let (sin_p, cos_p) = spec.pattern_angle.sin_cos();
    let inv_x = 1.0 / (2.0 * spec.sigma_x * spec.sigma_x);
    let inv_y = 1.0 / (2.0 * spec.sigma_y * spec.sigma_y);
    let reach = 10.0 * spec.sigma_x.max(spec.sigma_y);
    let images = |n: usize| -> i64 {
        if spec.wrap {
            (reach / n as f64).ceil() as i64 + 1
        } else {
            0
        }
    };
    let (ix_max, iy_max) = (images(nx), images(ny));

    let mut data = vec![0.0; plane * nt];
    data.par_chunks_mut(plane).enumerate().for_each(|(t, frame)| {
        let c = spec.center(t);
        for y in 0..ny {
            for x in 0..nx {
                let mut v = 0.0;
                for iy in -iy_max..=iy_max {
                    let dy = y as f64 - c.y + (iy * ny as i64) as f64;
                    for ix in -ix_max..=ix_max {
                        let dx = x as f64 - c.x + (ix * nx as i64) as f64;
                        let u = dx * cos_p + dy * sin_p;
                        let w = -dx * sin_p + dy * cos_p;
                        v += (-(u * u * inv_x + w * w * inv_y)).exp();
                    }
                }
                frame[x + nx * y] = spec.amplitude * v;
            }
        }
    });
    let seq = SequenceVolume::new(nx, ny, nt, data)?;
    add_noise(&seq, spec.noise_sigma, spec.seed)
}

/// Adds i.i.d. zero-mean Gaussian noise. `sigma == 0` returns the input
/// unchanged; the same `seed` always gives the same noise.
pub fn add_noise(seq: &SequenceVolume, sigma: f64, seed: u64) -> Result<SequenceVolume> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("{sigma} is negative or not finite")));
    }
    if sigma == 0.0 {
        return Ok(seq.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = seq
        .data()
        .iter()
        .map(|v| v + normal.sample(&mut rng))
        .collect();
    let (nx, ny, nt) = seq.dims();
    let mut out = SequenceVolume::new(nx, ny, nt, noisy)?;
    out.pixel_pitch = seq.pixel_pitch;
    out.frame_pitch = seq.frame_pitch;
    Ok(out)
}

/// Noise standard deviation giving `snr_db` against the mean signal power.
pub fn noise_sigma_for_snr(seq: &SequenceVolume, snr_db: f64) -> f64 {
    let power = seq.energy() / seq.len() as f64;
    (power / 10f64.powf(snr_db / 10.0)).sqrt()
}
