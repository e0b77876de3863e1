//! Speed-tuned Gaussian-Conical-Morlet (GCM) spatio-temporal wavelet analysis.
//!
//! - [`kernels`]: closed-form Fourier-domain wavelets and the motion group.
//! - [`stcwt`]: the FFT-based 2D+T transform engine and energy densities.
//! - [`speedscan`]: speed/orientation/aperture sweeps and peak location.
//! - [`synth`]: travelling-Gaussian test sequences.
//! - [`frames`]: frame-bound estimates for discretized GCM families.

pub mod error;
pub mod frames;
pub mod kernels;
pub mod search;
pub mod speedscan;
pub mod stcwt;
pub mod synth;

pub use error::{Error, Result};
pub use kernels::{ConeSpec, GcmParams, GroupElement, MorletParams, Vec2};
pub use stcwt::{FrameRange, SequenceVolume, SpectrumVolume, WaveletCoefficients};
