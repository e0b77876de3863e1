//! Discrete 2D+T wavelet transform engine.
//!
//! Sequences are transformed once with a unitary 3D DFT; each tuned filter is
//! sampled on the DFT grid, multiplied with the conjugated filter and brought
//! back with the inverse DFT. Boundaries are periodic.
//!
//! Frequency convention: spatial bins follow the DFT, `k_i = 2 pi i / N` for
//! `i` in `[-N/2, N/2)`. The temporal axis is read with the plane-wave sign,
//! so the wavelet sees `omega = -2 pi i / N_t` at temporal bin `i`. With this
//! choice a pattern moving with velocity `v` has its spectrum on the plane
//! `omega = k . v` in wavelet coordinates (and on `omega_dft = -k . v` in raw
//! DFT coordinates), and a filter oriented along `theta` responds to motion
//! in the direction `theta`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernels::{CenteredGcm, GcmParams, GroupElement, TunedGcm, Vec2};

/// Real image sequence, x fastest, then y, then t.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<f64>,
    /// Nominal pixel size; informational.
    pub pixel_pitch: f64,
    /// Nominal frame interval; informational.
    pub frame_pitch: f64,
}

impl SequenceVolume {
    pub fn new(nx: usize, ny: usize, nt: usize, data: Vec<f64>) -> Result<Self> {
        if nx < 2 || ny < 2 || nt < 2 {
            return Err(Error::InvalidVolume(format!(
                "every dimension must be at least 2, got {nx}x{ny}x{nt}"
            )));
        }
        if data.len() != nx * ny * nt {
            return Err(Error::InvalidVolume(format!(
                "expected {} samples for {nx}x{ny}x{nt}, got {}",
                nx * ny * nt,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume(format!("sample {i} is not finite")));
        }
        Ok(Self {
            nx,
            ny,
            nt,
            data,
            pixel_pitch: 1.0,
            frame_pitch: 1.0,
        })
    }

    pub fn zeros(nx: usize, ny: usize, nt: usize) -> Result<Self> {
        Self::new(nx, ny, nt, vec![0.0; nx * ny * nt])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn index(&self, x: usize, y: usize, t: usize) -> usize {
        x + self.nx * (y + self.ny * t)
    }

    pub fn get(&self, x: usize, y: usize, t: usize) -> f64 {
        self.data[self.index(x, y, t)]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let plane = self.nx * self.ny;
        &self.data[t * plane..(t + 1) * plane]
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Applies `f` to every sample, keeping the finiteness invariant.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = Self::new(
            self.nx,
            self.ny,
            self.nt,
            self.data.iter().map(|&v| f(v)).collect(),
        )?;
        out.pixel_pitch = self.pixel_pitch;
        out.frame_pitch = self.frame_pitch;
        Ok(out)
    }

    /// Circular shift by `(dx, dy, dt)` samples: `out(x + dx) = in(x)`.
    pub fn circular_shift(&self, dx: isize, dy: isize, dt: isize) -> Self {
        let (nx, ny, nt) = self.dims();
        let mut out = vec![0.0; self.data.len()];
        for t in 0..nt {
            let t2 = (t as isize + dt).rem_euclid(nt as isize) as usize;
            for y in 0..ny {
                let y2 = (y as isize + dy).rem_euclid(ny as isize) as usize;
                for x in 0..nx {
                    let x2 = (x as isize + dx).rem_euclid(nx as isize) as usize;
                    out[x2 + nx * (y2 + ny * t2)] = self.get(x, y, t);
                }
            }
        }
        Self {
            data: out,
            ..self.clone()
        }
    }

    /// Periodic reflection `y -> -y (mod ny)`, the mirror that maps `ky` to
    /// `-ky` on the DFT grid.
    pub fn mirror_y(&self) -> Self {
        let (nx, ny, nt) = self.dims();
        let mut out = vec![0.0; self.data.len()];
        for t in 0..nt {
            for y in 0..ny {
                let y2 = (ny - y) % ny;
                for x in 0..nx {
                    out[x + nx * (y2 + ny * t)] = self.get(x, y, t);
                }
            }
        }
        Self {
            data: out,
            ..self.clone()
        }
    }
}

/// Signed DFT frequency index for storage index `i` on an axis of length `n`.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Storage index for a signed frequency index.
pub fn storage_index(s: i64, n: usize) -> usize {
    s.rem_euclid(n as i64) as usize
}

/// Physical coordinates of the DFT bins of an `nx x ny x nt` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyGrid {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl FrequencyGrid {
    pub fn new(nx: usize, ny: usize, nt: usize) -> Self {
        Self { nx, ny, nt }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kx(&self, ix: usize) -> f64 {
        bin_frequency(ix, self.nx)
    }

    pub fn ky(&self, iy: usize) -> f64 {
        bin_frequency(iy, self.ny)
    }

    pub fn k(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(self.kx(ix), self.ky(iy))
    }

    /// Wavelet-side temporal frequency of bin `it` (plane-wave sign).
    pub fn omega(&self, it: usize) -> f64 {
        -bin_frequency(it, self.nt)
    }

    /// Samples `f(k, omega)` at every bin, in storage order.
    pub fn sample<F>(&self, f: F) -> Vec<Complex64>
    where
        F: Fn(Vec2, f64) -> Complex64 + Sync,
    {
        let plane = self.nx * self.ny;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        out.par_chunks_mut(plane).enumerate().for_each(|(it, frame)| {
            let w = self.omega(it);
            for iy in 0..self.ny {
                for ix in 0..self.nx {
                    frame[ix + self.nx * iy] = f(self.k(ix, iy), w);
                }
            }
        });
        out
    }

    /// Outer product of a spatial and a temporal factor, in storage order.
    pub fn sample_separable<S, T>(&self, spatial: S, temporal: T) -> Vec<Complex64>
    where
        S: Fn(Vec2) -> Complex64 + Sync,
        T: Fn(f64) -> Complex64,
    {
        let plane = self.nx * self.ny;
        let mut space = vec![Complex64::new(0.0, 0.0); plane];
        space
            .par_chunks_mut(self.nx)
            .enumerate()
            .for_each(|(iy, row)| {
                for (ix, v) in row.iter_mut().enumerate() {
                    *v = spatial(self.k(ix, iy));
                }
            });
        let time: Vec<Complex64> = (0..self.nt).map(|it| temporal(self.omega(it))).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        out.par_chunks_mut(plane).zip(time.par_iter()).for_each(|(frame, &tw)| {
            if tw == Complex64::new(0.0, 0.0) {
                return;
            }
            for (o, &s) in frame.iter_mut().zip(&space) {
                if s != Complex64::new(0.0, 0.0) {
                    *o = s * tw;
                }
            }
        });
        out
    }
}

fn bin_frequency(i: usize, n: usize) -> f64 {
    2.0 * std::f64::consts::PI * signed_index(i, n) as f64 / n as f64
}

/// Unitary 3D DFT of a real sequence, stored in DFT order (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVolume {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<Complex64>,
}

impl SpectrumVolume {
    pub fn from_raw(nx: usize, ny: usize, nt: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != nx * ny * nt {
            return Err(Error::InvalidVolume(format!(
                "expected {} bins, got {}",
                nx * ny * nt,
                data.len()
            )));
        }
        Ok(Self { nx, ny, nt, data })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid::new(self.nx, self.ny, self.nt)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Bin at signed (logical) indices, each in `[-N/2, N/2)` or any alias.
    pub fn at(&self, sx: i64, sy: i64, st: i64) -> Complex64 {
        let ix = storage_index(sx, self.nx);
        let iy = storage_index(sy, self.ny);
        let it = storage_index(st, self.nt);
        self.data[ix + self.nx * (iy + self.ny * it)]
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Wavelet coefficients `W(b, tau)` for one tuning, over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    nx: usize,
    ny: usize,
    nt: usize,
    data: Vec<Complex64>,
    pub tuning: GroupElement,
}

impl WaveletCoefficients {
    pub fn new(
        nx: usize,
        ny: usize,
        nt: usize,
        data: Vec<Complex64>,
        tuning: GroupElement,
    ) -> Result<Self> {
        if data.len() != nx * ny * nt {
            return Err(Error::InvalidVolume(format!(
                "expected {} coefficients, got {}",
                nx * ny * nt,
                data.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            nt,
            data,
            tuning,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, t: usize) -> Complex64 {
        self.data[x + self.nx * (y + self.ny * t)]
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let plane = self.nx * self.ny;
        &self.data[t * plane..(t + 1) * plane]
    }
}

/// A filter that can be sampled on the DFT grid.
pub trait SpectralFilter: Sync {
    /// Filter value at wave-vector `k` and wavelet-side temporal frequency `omega`.
    fn response(&self, k: Vec2, omega: f64) -> Complex64;

    /// All grid samples in storage order.
    fn sample(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        grid.sample(|k, w| self.response(k, w))
    }
}

impl SpectralFilter for TunedGcm {
    fn response(&self, k: Vec2, omega: f64) -> Complex64 {
        self.eval(k, omega)
    }

    fn sample(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        let g = self.group();
        grid.sample_separable(
            |k| {
                let s = self.spatial(k);
                if s == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(s, -k.dot(g.b))
                }
            },
            |w| Complex64::from_polar(self.temporal(w), -w * g.tau),
        )
    }
}

impl SpectralFilter for CenteredGcm {
    fn response(&self, k: Vec2, omega: f64) -> Complex64 {
        self.eval(k, omega)
    }

    fn sample(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        let g = *self.tuned().group();
        grid.sample_separable(
            |k| {
                let s = self.spatial(k);
                if s == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(s, -k.dot(g.b))
                }
            },
            |w| Complex64::from_polar(self.temporal(w), -w * g.tau),
        )
    }
}

/// Adapts a closure into a [`SpectralFilter`].
pub struct FnFilter<F>(pub F);

impl<F> SpectralFilter for FnFilter<F>
where
    F: Fn(Vec2, f64) -> Complex64 + Sync,
{
    fn response(&self, k: Vec2, omega: f64) -> Complex64 {
        (self.0)(k, omega)
    }
}

/// Either form of the tuned GCM, as selected by the `centered` flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GcmFilter {
    Tuned(TunedGcm),
    Centered(CenteredGcm),
}

impl GcmFilter {
    pub fn new(g: GroupElement, params: GcmParams, centered: bool) -> Result<Self> {
        Ok(if centered {
            Self::Centered(CenteredGcm::new(g, params)?)
        } else {
            Self::Tuned(TunedGcm::new(g, params)?)
        })
    }

    pub fn group(&self) -> GroupElement {
        match self {
            Self::Tuned(f) => *f.group(),
            Self::Centered(f) => *f.tuned().group(),
        }
    }

    /// Largest value of `|psi|^2` over all (k, omega).
    pub fn peak_gain(&self) -> f64 {
        let tuned = match self {
            Self::Tuned(f) => *f,
            Self::Centered(f) => *f.tuned(),
        };
        let axis = Vec2::unit(tuned.group().theta + tuned.params().cone.theta_axis);
        let k = axis * tuned.spatial_center();
        tuned.magnitude(k, tuned.temporal_center()).powi(2)
    }
}

impl SpectralFilter for GcmFilter {
    fn response(&self, k: Vec2, omega: f64) -> Complex64 {
        match self {
            Self::Tuned(f) => f.response(k, omega),
            Self::Centered(f) => f.response(k, omega),
        }
    }

    fn sample(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        match self {
            Self::Tuned(f) => f.sample(grid),
            Self::Centered(f) => f.sample(grid),
        }
    }
}

/// Reusable 3D FFT plans for one grid size, with call counters.
pub struct Fft3 {
    nx: usize,
    ny: usize,
    nt: usize,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
    forward_calls: AtomicUsize,
    inverse_calls: AtomicUsize,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3")
            .field("dims", &(self.nx, self.ny, self.nt))
            .field("forward_calls", &self.forward_calls())
            .field("inverse_calls", &self.inverse_calls())
            .finish()
    }
}

impl Fft3 {
    pub fn new(nx: usize, ny: usize, nt: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            nt,
            forward: [
                planner.plan_fft_forward(nx),
                planner.plan_fft_forward(ny),
                planner.plan_fft_forward(nt),
            ],
            inverse: [
                planner.plan_fft_inverse(nx),
                planner.plan_fft_inverse(ny),
                planner.plan_fft_inverse(nt),
            ],
            forward_calls: AtomicUsize::new(0),
            inverse_calls: AtomicUsize::new(0),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nt)
    }

    /// Number of forward transforms performed so far.
    pub fn forward_calls(&self) -> usize {
        self.forward_calls.load(Ordering::Relaxed)
    }

    /// Number of inverse transforms performed so far.
    pub fn inverse_calls(&self) -> usize {
        self.inverse_calls.load(Ordering::Relaxed)
    }

    fn check_dims(&self, dims: (usize, usize, usize)) -> Result<()> {
        if dims != self.dims() {
            return Err(Error::GridMismatch {
                expected: self.dims(),
                actual: dims,
            });
        }
        Ok(())
    }

    /// Unitary forward transform of a real sequence.
    pub fn forward(&self, seq: &SequenceVolume) -> Result<SpectrumVolume> {
        self.check_dims(seq.dims())?;
        if seq.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume("sequence has non-finite samples".into()));
        }
        let mut data: Vec<Complex64> = seq.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        self.forward_calls.fetch_add(1, Ordering::Relaxed);
        SpectrumVolume::from_raw(self.nx, self.ny, self.nt, data)
    }

    /// Unitary inverse transform in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        if data.len() != self.nx * self.ny * self.nt {
            return Err(Error::InvalidVolume(format!(
                "expected {} bins, got {}",
                self.nx * self.ny * self.nt,
                data.len()
            )));
        }
        self.transform(data, &self.inverse);
        self.inverse_calls.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let (nx, ny, nt) = self.dims();
        let plane = nx * ny;

        // x: contiguous rows
        data.par_chunks_mut(plane).for_each(|frame| plans[0].process(frame));

        // y: transpose each frame, transform rows, transpose back
        data.par_chunks_mut(plane).for_each(|frame| {
            let mut t = vec![Complex64::new(0.0, 0.0); plane];
            for y in 0..ny {
                for x in 0..nx {
                    t[y + ny * x] = frame[x + nx * y];
                }
            }
            plans[1].process(&mut t);
            for x in 0..nx {
                for y in 0..ny {
                    frame[x + nx * y] = t[y + ny * x];
                }
            }
        });

        // t: gather columns into a t-fastest buffer
        let mut cols = vec![Complex64::new(0.0, 0.0); data.len()];
        {
            let src: &[Complex64] = data;
            cols.par_chunks_mut(nt).enumerate().for_each(|(p, col)| {
                for (t, c) in col.iter_mut().enumerate() {
                    *c = src[p + plane * t];
                }
            });
        }
        cols.par_chunks_mut(nt * 64).for_each(|chunk| plans[2].process(chunk));
        let scale = 1.0 / ((nx * ny * nt) as f64).sqrt();
        data.par_chunks_mut(plane).enumerate().for_each(|(t, frame)| {
            for (p, v) in frame.iter_mut().enumerate() {
                *v = cols[p * nt + t] * scale;
            }
        });
    }
}

/// Unitary 3D DFT of `seq` (Parseval holds with constant 1).
pub fn forward_fft3(seq: &SequenceVolume) -> Result<SpectrumVolume> {
    let (nx, ny, nt) = seq.dims();
    Fft3::new(nx, ny, nt).forward(seq)
}

/// Multiplies `spec` by the conjugated filter samples and inverse-transforms.
pub fn apply_filter_with(
    fft: &Fft3,
    spec: &SpectrumVolume,
    filter: &dyn SpectralFilter,
    tuning: GroupElement,
) -> Result<WaveletCoefficients> {
    fft.check_dims(spec.dims())?;
    let samples = filter.sample(&spec.grid());
    let mut data: Vec<Complex64> = samples
        .par_iter()
        .zip(spec.data().par_iter())
        .map(|(h, s)| h.conj() * s)
        .collect();
    fft.inverse_in_place(&mut data)?;
    let (nx, ny, nt) = spec.dims();
    WaveletCoefficients::new(nx, ny, nt, data, tuning)
}

/// Wavelet coefficients of the sequence whose spectrum is `spec`, for the
/// translation-free tuning `g`. Translations are produced by the inverse DFT,
/// so a `g` with nonzero `b` or `tau` is rejected.
pub fn apply_tuned_filter(
    spec: &SpectrumVolume,
    g: &GroupElement,
    params: &GcmParams,
    centered: bool,
) -> Result<WaveletCoefficients> {
    if !g.is_translation_free() {
        return Err(Error::TranslatedFilter {
            b: [g.b.x, g.b.y],
            tau: g.tau,
        });
    }
    let filter = GcmFilter::new(*g, *params, centered)?;
    let (nx, ny, nt) = spec.dims();
    apply_filter_with(&Fft3::new(nx, ny, nt), spec, &filter, *g)
}

/// The set `N0` of frames an energy is summed over.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FrameRange {
    #[default]
    All,
    Frames(Vec<usize>),
}

impl FrameRange {
    /// Sorted, de-duplicated indices after validation against `nt`.
    pub fn resolve(&self, nt: usize) -> Result<Vec<usize>> {
        match self {
            FrameRange::All => Ok((0..nt).collect()),
            FrameRange::Frames(v) => {
                if v.is_empty() {
                    return Err(Error::EmptyFrameRange);
                }
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                if let Some(&index) = v.iter().find(|&&i| i >= nt) {
                    return Err(Error::FrameOutOfRange { index, nt });
                }
                Ok(v)
            }
        }
    }

    /// True when the range selects every frame of an `nt`-frame sequence.
    pub fn covers_all(&self, nt: usize) -> bool {
        match self {
            FrameRange::All => true,
            FrameRange::Frames(_) => self.resolve(nt).map(|v| v.len() == nt).unwrap_or(false),
        }
    }
}

/// `E_tot = sum over selected frames and all pixels of |W|^2`.
pub fn energy_density(coeffs: &WaveletCoefficients, frame_range: &FrameRange) -> Result<f64> {
    let (_, _, nt) = coeffs.dims();
    let frames = frame_range.resolve(nt)?;
    Ok(frames
        .iter()
        .map(|&t| coeffs.frame(t).iter().map(|v| v.norm_sqr()).sum::<f64>())
        .sum())
}

/// Fourier-side energy `sum |psi|^2 |s|^2`, equal to the all-frames
/// [`energy_density`] by Parseval.
pub fn parseval_energy(spec: &SpectrumVolume, filter: &dyn SpectralFilter) -> f64 {
    let samples = filter.sample(&spec.grid());
    samples
        .par_iter()
        .zip(spec.data().par_iter())
        .map(|(h, s)| h.norm_sqr() * s.norm_sqr())
        .sum()
}
