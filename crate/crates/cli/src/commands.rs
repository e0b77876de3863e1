//! Command implementations.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use gcm_core::frames::{estimate_bounds, Discretization, FrameKernel, TightStub};
use gcm_core::kernels::{
    apply_group, arp, eval_cauchy_2d, eval_centered_gcm, eval_gc_2d, eval_morlet_2d,
    magnitude_argmax, ArpKind,
};
use gcm_core::speedscan::{Refine, ScanConfig, SpeedScanner};
use gcm_core::synth::{generate, GaussianSceneSpec};
use gcm_core::{ConeSpec, FrameRange, GcmParams, GroupElement, MorletParams, Vec2};
use num_complex::Complex64;
use serde_json::json;

use crate::error::CliError;
use crate::stv::{sidecar_path, StvFile};
use crate::{
    ApertureArgs, CompareArgs, FrameBoundsArgs, FrameKernelType, KernelArgs, KernelType,
    OrientArgs, ScanArgs, ShapeArgs, SweepArgs, SynthArgs,
};

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let (nx, ny, nt) = a.size;
    let start = match a.start.as_ref().map(|l| l.0.as_slice()) {
        None => None,
        Some([x, y]) => Some(Vec2::new(*x, *y)),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "--start needs two coordinates, got {}",
                other.len()
            )))
        }
    };
    let mut spec = GaussianSceneSpec {
        nx,
        ny,
        nt,
        sigma_x: a.sigma_x,
        sigma_y: a.sigma_y,
        pattern_angle: a.pattern_angle,
        v_r: a.speed,
        motion_angle: a.motion_angle,
        start,
        amplitude: a.amplitude,
        noise_sigma: a.noise,
        seed: a.seed,
        wrap: !a.no_wrap,
    };
    let seq = generate(&spec)?;
    spec.start = Some(spec.start_point());

    let file = StvFile::from_sequence(&seq, a.dtype);
    file.write(&a.out)?;
    let sidecar = sidecar_path(&a.out);
    let text = serde_json::to_string_pretty(&spec).expect("scene spec serializes");
    fs::write(&sidecar, text + "\n").map_err(|e| CliError::io(&sidecar, e))?;
    println!(
        "wrote {} ({nx}x{ny}x{nt} {:?}, v_r={}, {} bytes)",
        a.out.display(),
        a.dtype,
        a.speed,
        file.encoded_len()
    );
    Ok(())
}

fn params(shape: &ShapeArgs, theta_axis: f64) -> Result<GcmParams, CliError> {
    let cone = ConeSpec::new(shape.alpha, theta_axis)?;
    let omega0 = shape
        .omega0
        .unwrap_or_else(|| ((shape.l + shape.m) as f64).sqrt());
    Ok(GcmParams::new(shape.l, shape.m, shape.sigma, omega0, cone)?)
}

fn prepare(s: &SweepArgs, theta: f64) -> Result<(SpeedScanner, ScanConfig), CliError> {
    let config = ScanConfig {
        c_min: s.c_min,
        c_max: s.c_max,
        c_step: s.c_step,
        theta,
        a_s: s.a_s,
        a_t: s.a_t,
        params: params(&s.shape, 0.0)?,
        frame_range: match &s.frames {
            Some(f) => FrameRange::Frames(f.0.clone()),
            None => FrameRange::All,
        },
        refine: if s.refine {
            Refine::GoldenSection { tol: s.refine_tol }
        } else {
            Refine::None
        },
    };
    config.validate()?;
    let seq = StvFile::read(&s.input)?.to_sequence()?;
    config.frame_range.resolve(seq.dims().2)?;
    Ok((SpeedScanner::new(&seq)?, config))
}

pub fn scan(a: &ScanArgs) -> Result<(), CliError> {
    let (scanner, config) = prepare(&a.sweep, a.theta)?;
    let curve = scanner.scan(&config)?;
    let mut csv = String::from("c,energy\n");
    for s in &curve.samples {
        writeln!(csv, "{:?},{:?}", s.c, s.energy).unwrap();
    }
    writeln!(csv, "# v_m={:?}", curve.v_m).unwrap();
    emit(a.sweep.out.as_deref(), &csv)?;
    if curve.no_motion {
        return Err(CliError::Flat);
    }
    Ok(())
}

/// `min, min + step, ...` up to `max` inclusive.
fn range(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(max >= min) {
        return Err(CliError::Usage(format!(
            "empty range {min}..{max} step {step}"
        )));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

fn sweep_csv(header: &str, rows: impl Iterator<Item = (f64, f64, f64, bool)>) -> (String, usize, usize) {
    let mut csv = format!("{header},v_m,peak_energy\n");
    let mut flat = Vec::new();
    let mut total = 0;
    for (x, v_m, e, no_motion) in rows {
        writeln!(csv, "{x:?},{v_m:?},{e:?}").unwrap();
        if no_motion {
            flat.push(format!("{x:?}"));
        }
        total += 1;
    }
    if !flat.is_empty() {
        writeln!(csv, "# no_motion {header}={}", flat.join(";")).unwrap();
    }
    (csv, flat.len(), total)
}

pub fn orient_scan(a: &OrientArgs) -> Result<(), CliError> {
    let thetas = match &a.thetas {
        Some(t) if t.0.is_empty() => return Err(CliError::Usage("--thetas is empty".into())),
        Some(t) => t.0.clone(),
        None => range(a.theta_min, a.theta_max, a.theta_step)?,
    };
    let (scanner, config) = prepare(&a.sweep, 0.0)?;
    let samples = scanner.scan_orientations(&config, &thetas)?;
    let (csv, flat, total) = sweep_csv(
        "theta",
        samples.iter().map(|s| (s.theta, s.v_m, s.peak_energy, s.no_motion)),
    );
    emit(a.sweep.out.as_deref(), &csv)?;
    if flat == total {
        return Err(CliError::Flat);
    }
    Ok(())
}

pub fn aperture_sweep(a: &ApertureArgs) -> Result<(), CliError> {
    if a.alphas.0.is_empty() {
        return Err(CliError::Usage("--alphas is empty".into()));
    }
    let (scanner, config) = prepare(&a.sweep, a.theta)?;
    let samples = scanner.aperture_sweep(&config, &a.alphas.0)?;
    let (csv, flat, total) = sweep_csv(
        "alpha",
        samples.iter().map(|s| (s.alpha, s.v_m, s.peak_energy, s.no_motion)),
    );
    emit(a.sweep.out.as_deref(), &csv)?;
    if flat == total {
        return Err(CliError::Flat);
    }
    Ok(())
}

fn companion(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn kernel(a: &KernelArgs) -> Result<(), CliError> {
    let two_d = matches!(a.kind, KernelType::Gc2d | KernelType::Morlet2d | KernelType::Cauchy2d);
    let (nx, ny, nt) = if two_d { (a.size.0, a.size.1, 1) } else { a.size };
    if nx == 0 || ny == 0 || nt == 0 {
        return Err(CliError::Usage("--size dimensions must be positive".into()));
    }
    for (name, v) in [("--k-extent", a.k_extent), ("--omega-extent", a.omega_extent)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    let p = params(&a.shape, a.theta_axis)?;
    let g = GroupElement::tuning(a.theta, a.a_s, a.a_t, a.c);
    g.validate()?;
    let morlet = MorletParams::new(Vec2::new(a.k0x, a.k0y), a.eps)?;
    let eta = Vec2::new(a.eta_x, a.eta_y);
    // surface invalid damping before sampling
    eval_cauchy_2d(Vec2::ZERO, &p.cone, a.shape.l, a.shape.m, eta).or_else(|e| {
        if a.kind == KernelType::Cauchy2d {
            Err(e)
        } else {
            Ok(0.0)
        }
    })?;

    let axis = |i: usize, n: usize, half: f64| -half + 2.0 * half * i as f64 / n as f64;
    let eval = |k: Vec2, w: f64| -> Result<Complex64, CliError> {
        let real = |v: f64| Complex64::new(v, 0.0);
        Ok(match a.kind {
            KernelType::Gcm => apply_group(&g, &p, k, w)?,
            KernelType::CenteredGcm => eval_centered_gcm(&g, &p, k, w)?,
            KernelType::Gc2d => real(eval_gc_2d(k, &p)),
            KernelType::Morlet2d => real(eval_morlet_2d(k, &morlet, !a.no_correction)),
            KernelType::Cauchy2d => real(eval_cauchy_2d(k, &p.cone, a.shape.l, a.shape.m, eta)?),
        })
    };
    let mut re = Vec::with_capacity(nx * ny * nt);
    let mut im = Vec::with_capacity(nx * ny * nt);
    for t in 0..nt {
        let w = if two_d { 0.0 } else { axis(t, nt, a.omega_extent) };
        for y in 0..ny {
            for x in 0..nx {
                let k = Vec2::new(axis(x, nx, a.k_extent), axis(y, ny, a.k_extent));
                let v = eval(k, w)?;
                re.push(v.re);
                im.push(v.im);
            }
        }
    }
    let imag_path = companion(&a.out, ".imag.stv");
    let meta_path = companion(&a.out, ".json");
    StvFile::new(nx, ny, nt, a.dtype, re)?.write(&a.out)?;
    StvFile::new(nx, ny, nt, a.dtype, im)?.write(&imag_path)?;
    let meta = json!({
        "type": format!("{:?}", a.kind),
        "dims": [nx, ny, nt],
        "kx": {"min": -a.k_extent, "step": 2.0 * a.k_extent / nx as f64},
        "ky": {"min": -a.k_extent, "step": 2.0 * a.k_extent / ny as f64},
        "omega": if two_d {
            json!(null)
        } else {
            json!({"min": -a.omega_extent, "step": 2.0 * a.omega_extent / nt as f64})
        },
        "params": p,
        "group": g,
        "morlet": morlet,
        "eta": eta,
        "real": a.out,
        "imag": imag_path,
    });
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, text + "\n").map_err(|e| CliError::io(&meta_path, e))?;
    println!("wrote {} and {}", a.out.display(), imag_path.display());
    Ok(())
}

pub fn frame_bounds(a: &FrameBoundsArgs) -> Result<(), CliError> {
    let disc = Discretization {
        a0: a.a0,
        c0: a.c0,
        q1: a.q1,
        scale_range: [a.scale_min, a.scale_max],
        speed_range: [a.speed_min, a.speed_max],
        rotation_range: [0, 2 * a.q1 as i32 - 1],
        bx0: a.bx0,
        by0: a.by0,
        tau0: a.tau0,
        lattice_extent: a.lattice,
        search_grid: a.grid,
        gamma_grid: a.gamma_grid,
    };
    disc.validate()?;
    let gcm;
    let stub;
    let kernel: &dyn FrameKernel = match a.kernel {
        FrameKernelType::Gcm => {
            gcm = params(&a.shape, 0.0)?;
            &gcm
        }
        FrameKernelType::Stub => {
            stub = TightStub::new(&disc);
            &stub
        }
    };
    let report = estimate_bounds(&disc, kernel)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(a.out.as_deref(), &text)?;
    if !report.valid {
        return Err(CliError::InvalidFrame);
    }
    Ok(())
}

pub fn compare_aperture(a: &CompareArgs) -> Result<(), CliError> {
    if a.morlet_k0.0.len() != a.morlet_eps.0.len() {
        return Err(CliError::Usage(format!(
            "{} Morlet k0 values but {} epsilon values",
            a.morlet_k0.0.len(),
            a.morlet_eps.0.len()
        )));
    }
    if !(a.step > 0.0 && a.step.is_finite()) {
        return Err(CliError::Usage("--step must be positive".into()));
    }
    let mut csv = String::from("family,params,arp,radial_center\n");
    for (&k0, &eps) in a.morlet_k0.0.iter().zip(&a.morlet_eps.0) {
        if !(k0 > 0.0) {
            return Err(CliError::Usage(format!("Morlet k0 {k0} must be positive")));
        }
        let p = MorletParams::new(Vec2::new(k0, 0.0), eps)?;
        let peak = magnitude_argmax(|k| eval_morlet_2d(k, &p, true).abs(), k0 + 6.0, a.step);
        let ratio = arp(ArpKind::Morlet { k0, epsilon: eps });
        writeln!(csv, "morlet,k0={k0:?};eps={eps:?},{ratio:?},{:?}", peak.norm()).unwrap();
    }
    for &alpha in &a.gcm_alpha.0 {
        let shape = ShapeArgs {
            alpha,
            l: a.l,
            m: a.m,
            sigma: a.sigma,
            omega0: None,
        };
        let p = params(&shape, 0.0)?;
        let extent = 2.0 * p.radial_center() + 6.0;
        let peak = magnitude_argmax(|k| eval_gc_2d(k, &p), extent, a.step);
        let ratio = arp(ArpKind::Conical { alpha });
        writeln!(csv, "gcm,alpha={alpha:?};l={};m={},{ratio:?},{:?}", a.l, a.m, peak.norm()).unwrap();
    }
    emit(a.out.as_deref(), &csv)
}
