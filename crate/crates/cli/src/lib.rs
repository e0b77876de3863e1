//! Command-line surface of the GCM toolkit: volume files, sweeps and
//! reports as CSV/JSON.

pub mod commands;
pub mod error;
pub mod parse;
pub mod stv;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
use parse::{parse_angle, parse_angle_list, parse_frames, parse_number_list, parse_size, List};
use stv::Dtype;

#[derive(Debug, Parser)]
#[command(name = "gcm", version, about = "Speed-tuned spatio-temporal wavelet analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a travelling-Gaussian sequence.
    Synth(SynthArgs),
    /// Energy against speed tuning for one orientation.
    Scan(ScanArgs),
    /// Measured speed and peak energy against wavelet orientation.
    OrientScan(OrientArgs),
    /// Measured speed and peak energy against cone aperture.
    ApertureSweep(ApertureArgs),
    /// Sample a wavelet on a frequency grid.
    Kernel(KernelArgs),
    /// Estimate frame bounds of a discretized family.
    FrameBounds(FrameBoundsArgs),
    /// Angular resolving power and radial center, Morlet against GCM.
    CompareAperture(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Volume size NXxNYxNT.
    #[arg(long, default_value = "64x64x16", value_parser = parse_size)]
    pub size: (usize, usize, usize),
    /// Speed in pixels/frame.
    #[arg(long, default_value_t = 3.0)]
    pub speed: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub motion_angle: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 8.0)]
    pub sigma_y: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub pattern_angle: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Standard deviation of additive white noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start center "X,Y" in pixels (default: volume center).
    #[arg(long, value_parser = parse_number_list, allow_hyphen_values = true)]
    pub start: Option<List<f64>>,
    /// Require the pattern to stay inside the volume instead of wrapping.
    #[arg(long)]
    pub no_wrap: bool,
    #[arg(long, value_enum, default_value_t = Dtype::F32)]
    pub dtype: Dtype,
    #[arg(long)]
    pub out: PathBuf,
}

/// Wavelet shape flags shared by the analysis commands.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Cone half-aperture.
    #[arg(long, default_value = "pi/16", value_parser = parse_angle)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10)]
    pub l: u32,
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Temporal center frequency (default sqrt(l + m)).
    #[arg(long)]
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub c_min: f64,
    #[arg(long, default_value_t = 6.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub c_step: f64,
    #[arg(long, default_value_t = 3.0)]
    pub a_s: f64,
    #[arg(long, default_value_t = 3.0)]
    pub a_t: f64,
    /// Golden-section refinement of the peak.
    #[arg(long)]
    pub refine: bool,
    #[arg(long, default_value_t = gcm_core::speedscan::DEFAULT_REFINE_TOL)]
    pub refine_tol: f64,
    /// Frames to sum over, e.g. "0,3,5-8" (default: all).
    #[arg(long, value_parser = parse_frames)]
    pub frames: Option<List<usize>>,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Args)]
pub struct OrientArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Explicit orientations; overrides the range flags.
    #[arg(long, value_parser = parse_angle_list, allow_hyphen_values = true)]
    pub thetas: Option<List<f64>>,
    #[arg(long, default_value = "-pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_min: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_max: f64,
    #[arg(long, default_value = "pi/32", value_parser = parse_angle)]
    pub theta_step: f64,
}

#[derive(Debug, Args)]
pub struct ApertureArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value = "pi/8,pi/16,pi/64,pi/256", value_parser = parse_angle_list)]
    pub alphas: List<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelType {
    Gcm,
    Gc2d,
    Morlet2d,
    Cauchy2d,
    CenteredGcm,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long = "type", value_enum)]
    pub kind: KernelType,
    /// Samples per axis NXxNYxNT; NT is forced to 1 for 2D kernels.
    #[arg(long, default_value = "128x128x32", value_parser = parse_size)]
    pub size: (usize, usize, usize),
    /// Half-width of the sampled |k| square.
    #[arg(long, default_value_t = 8.0)]
    pub k_extent: f64,
    /// Half-width of the sampled omega range.
    #[arg(long, default_value_t = 8.0)]
    pub omega_extent: f64,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Cone axis direction.
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta_axis: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a_t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Morlet center wave-vector.
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    pub k0x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub k0y: f64,
    /// Morlet anisotropy.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Omit the Morlet admissibility correction term.
    #[arg(long)]
    pub no_correction: bool,
    /// Cauchy damping vector.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub eta_x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta_y: f64,
    #[arg(long, value_enum, default_value_t = Dtype::F64)]
    pub dtype: Dtype,
    /// Real part; the imaginary part goes to `<stem>.imag.stv` and the
    /// metadata to `<stem>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameKernelType {
    Gcm,
    /// Indicator of one lattice cell (tight-frame check).
    Stub,
}

#[derive(Debug, Args)]
pub struct FrameBoundsArgs {
    #[arg(long, value_enum, default_value_t = FrameKernelType::Gcm)]
    pub kernel: FrameKernelType,
    #[arg(long, default_value_t = 2.0)]
    pub a0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub c0: f64,
    /// Rotation step pi/q1.
    #[arg(long, default_value_t = 16)]
    pub q1: u32,
    #[arg(long, default_value_t = 0.5)]
    pub bx0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub by0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub tau0: f64,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    pub scale_min: i32,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    pub scale_max: i32,
    #[arg(long, default_value_t = -4, allow_hyphen_values = true)]
    pub speed_min: i32,
    #[arg(long, default_value_t = 4, allow_hyphen_values = true)]
    pub speed_max: i32,
    /// Translation-lattice half-extent.
    #[arg(long, default_value_t = 1)]
    pub lattice: u32,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 16)]
    pub gamma_grid: usize,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Output JSON (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "6,12,22", value_parser = parse_number_list)]
    pub morlet_k0: List<f64>,
    #[arg(long, default_value = "1,2,8", value_parser = parse_number_list)]
    pub morlet_eps: List<f64>,
    #[arg(long, default_value = "pi/256,pi/64,pi/16", value_parser = parse_angle_list)]
    pub gcm_alpha: List<f64>,
    #[arg(long, default_value_t = 10)]
    pub l: u32,
    #[arg(long, default_value_t = 10)]
    pub m: u32,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Frequency-grid cell size for the argmax search.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one parsed invocation. Outputs are written before a flat curve or
/// invalid frame is reported through the error.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => commands::synth(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::OrientScan(a) => commands::orient_scan(&a),
        Command::ApertureSweep(a) => commands::aperture_sweep(&a),
        Command::Kernel(a) => commands::kernel(&a),
        Command::FrameBounds(a) => commands::frame_bounds(&a),
        Command::CompareAperture(a) => commands::compare_aperture(&a),
    }
}
