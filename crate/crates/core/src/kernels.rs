//! Fourier-domain wavelets and filters.
//!
//! Everything here is a closed-form function of a spatial wave-vector `k`
//! (radians/pixel) and, for the spatio-temporal filters, a temporal frequency
//! `omega` (radians/frame). The conical family (Cauchy, Gaussian-Conical and
//! the Gaussian-Conical-Morlet product) is strictly supported in a convex cone
//! and returns an exact `0.0` outside it.
//!
//! The motion group acts on the mother GCM through [`GroupElement`]:
//! translation `(b, tau)`, rotation `theta`, separate spatial and temporal
//! dilations `a_s`, `a_t`, and the speed tuning `c`. Speed tuning scales the
//! spatial frequency by `c^q` and the temporal one by `c^-p`, with the fixed
//! exponents [`SPEED_EXPONENT_P`] and [`SPEED_EXPONENT_Q`].

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Temporal speed exponent: `omega -> c^-p * omega`.
pub const SPEED_EXPONENT_P: f64 = 2.0 / 3.0;
/// Spatial speed exponent: `k -> c^q * k`.
pub const SPEED_EXPONENT_Q: f64 = 1.0 / 3.0;

/// Projections onto the dual-cone edges smaller than this (relative to |k|)
/// are snapped to zero, so points on a cone edge evaluate to exactly `0.0`.
const EDGE_SNAP: f64 = 8.0 * f64::EPSILON;

/// A 2D wave-vector or spatial position.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `angle` from the positive x axis.
    pub fn unit(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::unit(angle) * radius
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Applies the rotation matrix `r^angle`.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A strictly convex cone `C(-alpha, alpha)` around the axis `theta_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    /// Half-aperture in radians, `0 < alpha < pi/2`.
    pub alpha: f64,
    /// Orientation of the cone axis (0 = positive kx axis).
    pub theta_axis: f64,
}

impl ConeSpec {
    pub fn new(alpha: f64, theta_axis: f64) -> Result<Self> {
        let cone = Self { alpha, theta_axis };
        cone.validate()?;
        Ok(cone)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < FRAC_PI_2) {
            return Err(invalid(
                "alpha",
                format!("{} is not in the open interval (0, pi/2)", self.alpha),
            ));
        }
        if !self.theta_axis.is_finite() {
            return Err(invalid("theta_axis", "must be finite"));
        }
        Ok(())
    }

    /// Half-aperture of the dual cone, `pi/2 - alpha`.
    pub fn dual_alpha(&self) -> f64 {
        FRAC_PI_2 - self.alpha
    }

    pub fn axis(&self) -> Vec2 {
        Vec2::unit(self.theta_axis)
    }

    /// Edge unit vector `e_{+alpha}` (`positive`) or `e_{-alpha}`.
    pub fn edge(&self, positive: bool) -> Vec2 {
        let a = if positive { self.alpha } else { -self.alpha };
        Vec2::unit(self.theta_axis + a)
    }

    /// Dual-cone edge unit vector `e_{+alpha~}` (`positive`) or `e_{-alpha~}`.
    pub fn dual_edge(&self, positive: bool) -> Vec2 {
        let a = self.dual_alpha();
        let a = if positive { a } else { -a };
        Vec2::unit(self.theta_axis + a)
    }

    /// Returns `(k . e_{-alpha~}, k . e_{+alpha~})` when `k` lies in the
    /// closed cone, `None` otherwise. Both projections are non-negative and
    /// exactly zero on the corresponding edge.
    pub fn projections(&self, k: Vec2) -> Option<(f64, f64)> {
        let snap = EDGE_SNAP * k.norm();
        let mut lower = k.dot(self.dual_edge(false));
        let mut upper = k.dot(self.dual_edge(true));
        if lower.abs() <= snap {
            lower = 0.0;
        }
        if upper.abs() <= snap {
            upper = 0.0;
        }
        if lower >= 0.0 && upper >= 0.0 {
            Some((lower, upper))
        } else {
            None
        }
    }

    pub fn contains(&self, k: Vec2) -> bool {
        self.projections(k).is_some()
    }

    /// Strict interior membership (both dual projections positive).
    pub fn contains_strictly(&self, k: Vec2) -> bool {
        matches!(self.projections(k), Some((a, b)) if a > 0.0 && b > 0.0)
    }
}

/// Shape parameters of the Gaussian-Conical(-Morlet) wavelet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcmParams {
    /// Vanishing-moment order on the `e_{-alpha~}` edge.
    pub l: u32,
    /// Vanishing-moment order on the `e_{+alpha~}` edge.
    pub m: u32,
    /// Radial Gaussian scale.
    pub sigma: f64,
    /// Temporal Morlet center frequency (radians/frame).
    pub omega0: f64,
    pub cone: ConeSpec,
}

impl Default for GcmParams {
    /// `l = m = 10`, `sigma = 1`, aperture `pi/16` along +kx, and
    /// `omega0 = sqrt(l + m)`, which makes the tuned center slope
    /// `omega / kx` equal to `c` when `a_s == a_t`.
    fn default() -> Self {
        Self {
            l: 10,
            m: 10,
            sigma: 1.0,
            omega0: 20f64.sqrt(),
            cone: ConeSpec {
                alpha: std::f64::consts::PI / 16.0,
                theta_axis: 0.0,
            },
        }
    }
}

impl GcmParams {
    pub fn new(l: u32, m: u32, sigma: f64, omega0: f64, cone: ConeSpec) -> Result<Self> {
        let p = Self {
            l,
            m,
            sigma,
            omega0,
            cone,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same shape with `omega0` reset to the speed-matched default `sqrt(l + m)`.
    pub fn with_matched_omega0(mut self) -> Self {
        self.omega0 = self.radial_center();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(invalid("l", "must be at least 1"));
        }
        if self.m < 1 {
            return Err(invalid("m", "must be at least 1"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(invalid("sigma", format!("{} is not positive", self.sigma)));
        }
        if !self.omega0.is_finite() {
            return Err(invalid("omega0", "must be finite"));
        }
        self.cone.validate()
    }

    /// Center correction `chi(sigma) = sqrt(l+m) (sigma - 1) / sigma`.
    pub fn chi(&self) -> f64 {
        self.radial_center() * (self.sigma - 1.0) / self.sigma
    }

    /// Static central wave-number along the cone axis, `sqrt(l + m)`.
    ///
    /// The correction `chi` keeps the axial maximum here for every `sigma`.
    pub fn radial_center(&self) -> f64 {
        f64::from(self.l + self.m).sqrt()
    }
}

/// Parameters of the 2D Morlet wavelet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorletParams {
    /// Center wave-vector (radians/pixel).
    pub k0: Vec2,
    /// Anisotropy, `epsilon >= 1`; `A = diag[1, epsilon^-1/2]`.
    pub epsilon: f64,
}

impl MorletParams {
    pub fn new(k0: Vec2, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 1.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("{epsilon} is below 1")));
        }
        Ok(Self { k0, epsilon })
    }

    /// `|A^-1 v|^2` with `A^-1 = diag[1, sqrt(epsilon)]`.
    fn weighted_norm_sq(&self, v: Vec2) -> f64 {
        v.x * v.x + self.epsilon * v.y * v.y
    }
}

/// Motion-group element `{b, tau, theta; a_s, a_t, c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    /// Spatial translation (pixels).
    pub b: Vec2,
    /// Temporal translation (frames).
    pub tau: f64,
    /// Rotation (radians).
    pub theta: f64,
    /// Spatial scale.
    pub a_s: f64,
    /// Temporal scale.
    pub a_t: f64,
    /// Speed tuning (pixels/frame).
    pub c: f64,
}

impl Default for GroupElement {
    fn default() -> Self {
        Self::identity()
    }
}

impl GroupElement {
    pub const fn identity() -> Self {
        Self {
            b: Vec2::ZERO,
            tau: 0.0,
            theta: 0.0,
            a_s: 1.0,
            a_t: 1.0,
            c: 1.0,
        }
    }

    /// Translation-free element, the form consumed by the transform engine.
    pub const fn tuning(theta: f64, a_s: f64, a_t: f64, c: f64) -> Self {
        Self {
            b: Vec2::ZERO,
            tau: 0.0,
            theta,
            a_s,
            a_t,
            c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a_s", self.a_s), ("a_t", self.a_t), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} is not a positive finite number")));
            }
        }
        if !(self.theta.is_finite()
            && self.tau.is_finite()
            && self.b.x.is_finite()
            && self.b.y.is_finite())
        {
            return Err(invalid("g", "theta, tau and b must be finite"));
        }
        Ok(())
    }

    pub fn is_translation_free(&self) -> bool {
        self.b == Vec2::ZERO && self.tau == 0.0
    }

    /// `exp(-i (k.b + omega tau))`.
    pub fn phase(&self, k: Vec2, omega: f64) -> Complex64 {
        if self.is_translation_free() {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(1.0, -(k.dot(self.b) + omega * self.tau))
    }
}

/// 1D Cauchy (Paul) wavelet: `omega^m e^-omega` on the positive half-line.
pub fn eval_cauchy_1d(omega: f64, m: u32) -> f64 {
    if omega < 0.0 {
        0.0
    } else {
        omega.powi(m as i32) * (-omega).exp()
    }
}

/// 2D Morlet wavelet, optionally with its admissibility correction term.
pub fn eval_morlet_2d(k: Vec2, params: &MorletParams, with_correction: bool) -> f64 {
    let amp = params.epsilon.sqrt();
    let main = (-0.5 * params.weighted_norm_sq(k - params.k0)).exp();
    if !with_correction {
        return amp * main;
    }
    let corr =
        (-0.5 * params.weighted_norm_sq(params.k0)).exp() * (-0.5 * params.weighted_norm_sq(k)).exp();
    amp * (main - corr)
}

/// 2D Cauchy wavelet with axial decay vector `eta`, which must lie strictly
/// inside the cone.
pub fn eval_cauchy_2d(k: Vec2, cone: &ConeSpec, l: u32, m: u32, eta: Vec2) -> Result<f64> {
    if !cone.contains_strictly(eta) {
        return Err(invalid("eta", "decay vector must lie strictly inside the cone"));
    }
    Ok(match cone.projections(k) {
        Some((lower, upper)) => {
            upper.powi(l as i32) * lower.powi(m as i32) * (-k.dot(eta)).exp()
        }
        None => 0.0,
    })
}

/// 2D Gaussian-Conical wavelet.
pub fn eval_gc_2d(k: Vec2, params: &GcmParams) -> f64 {
    match params.cone.projections(k) {
        Some((lower, upper)) => {
            let axial = k.dot(params.cone.axis()) - params.chi();
            lower.powi(params.l as i32)
                * upper.powi(params.m as i32)
                * (-0.5 * params.sigma * axial * axial).exp()
        }
        None => 0.0,
    }
}

/// 1D temporal Morlet factor `exp(-(omega - omega0)^2 / 2)`.
pub fn eval_morlet_1d(omega: f64, omega0: f64) -> f64 {
    let d = omega - omega0;
    (-0.5 * d * d).exp()
}

/// Mother Gaussian-Conical-Morlet wavelet.
pub fn eval_gcm(k: Vec2, omega: f64, params: &GcmParams) -> f64 {
    let spatial = eval_gc_2d(k, params);
    if spatial == 0.0 {
        return 0.0;
    }
    spatial * eval_morlet_1d(omega, params.omega0)
}

/// A GCM wavelet transported by a group element, with the group-dependent
/// factors precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunedGcm {
    params: GcmParams,
    group: GroupElement,
    spatial_scale: f64,
    temporal_scale: f64,
    norm: f64,
}

impl TunedGcm {
    pub fn new(group: GroupElement, params: GcmParams) -> Result<Self> {
        group.validate()?;
        params.validate()?;
        Ok(Self {
            params,
            group,
            spatial_scale: group.a_s * group.c.powf(SPEED_EXPONENT_Q),
            temporal_scale: group.c.powf(-SPEED_EXPONENT_P) * group.a_t,
            norm: 1.0 / (group.a_s * group.a_t.sqrt()),
        })
    }

    pub fn params(&self) -> &GcmParams {
        &self.params
    }

    pub fn group(&self) -> &GroupElement {
        &self.group
    }

    /// Spatial factor: the GC wavelet at `c^q a_s r^-theta k`, including the
    /// `a_s^-1` part of the normalization.
    pub fn spatial(&self, k: Vec2) -> f64 {
        let u = k.rotate(-self.group.theta) * self.spatial_scale;
        let v = eval_gc_2d(u, &self.params);
        if v == 0.0 {
            0.0
        } else {
            v / self.group.a_s
        }
    }

    /// Temporal factor: the Morlet at `c^-p a_t omega`, including `a_t^-1/2`.
    pub fn temporal(&self, omega: f64) -> f64 {
        eval_morlet_1d(self.temporal_scale * omega, self.params.omega0) / self.group.a_t.sqrt()
    }

    /// Real magnitude `|psi_g(k, omega)|` (the translation only adds a phase).
    pub fn magnitude(&self, k: Vec2, omega: f64) -> f64 {
        let s = self.spatial(k);
        if s == 0.0 {
            return 0.0;
        }
        s * self.temporal(omega)
    }

    pub fn eval(&self, k: Vec2, omega: f64) -> Complex64 {
        let mag = self.magnitude(k, omega);
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.group.phase(k, omega) * mag
    }

    /// Overall normalization `a_s^-1 a_t^-1/2`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Temporal frequency of the tuned Morlet maximum, `omega0 c^p / a_t`.
    pub fn temporal_center(&self) -> f64 {
        self.params.omega0 / self.temporal_scale
    }

    /// Axial wave-number of the tuned spatial maximum, `sqrt(l+m) / (a_s c^q)`.
    pub fn spatial_center(&self) -> f64 {
        self.params.radial_center() / self.spatial_scale
    }
}

/// `psi^GCM_g(k, omega)`: the mother GCM under the action of `g`.
pub fn apply_group(g: &GroupElement, params: &GcmParams, k: Vec2, omega: f64) -> Result<Complex64> {
    Ok(TunedGcm::new(*g, *params)?.eval(k, omega))
}

/// Compensation wave-vector
/// `k0 = (1/a_s)(1/a_t)(sqrt(l+m)/c^q)(cos theta, sin theta)`.
///
/// The `1/a_t` factor is kept as published even though it mixes temporal
/// scale into a spatial quantity; with `a_t != 1` the compensated filter is no
/// longer exactly centered on the origin.
pub fn central_wavevector(g: &GroupElement, params: &GcmParams) -> Vec2 {
    let radius = params.radial_center() / (g.a_s * g.a_t * g.c.powf(SPEED_EXPONENT_Q));
    Vec2::from_polar(radius, g.theta + params.cone.theta_axis)
}

/// The tuned GCM translated in Fourier space so that its spatial center
/// (the compensation vector `k0`) and its temporal center sit on the origin.
/// The result is a non-oscillating directional low-pass filter whose support
/// cone has its apex at `-k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredGcm {
    tuned: TunedGcm,
    k0: Vec2,
    omega_shift: f64,
}

impl CenteredGcm {
    pub fn new(group: GroupElement, params: GcmParams) -> Result<Self> {
        let tuned = TunedGcm::new(group, params)?;
        Ok(Self {
            k0: central_wavevector(&group, &params),
            omega_shift: tuned.temporal_center(),
            tuned,
        })
    }

    pub fn k0(&self) -> Vec2 {
        self.k0
    }

    pub fn tuned(&self) -> &TunedGcm {
        &self.tuned
    }

    pub fn spatial(&self, k: Vec2) -> f64 {
        self.tuned.spatial(k + self.k0)
    }

    pub fn temporal(&self, omega: f64) -> f64 {
        self.tuned.temporal(omega + self.omega_shift)
    }

    pub fn magnitude(&self, k: Vec2, omega: f64) -> f64 {
        let s = self.spatial(k);
        if s == 0.0 {
            return 0.0;
        }
        s * self.temporal(omega)
    }

    pub fn eval(&self, k: Vec2, omega: f64) -> Complex64 {
        let mag = self.magnitude(k, omega);
        if mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.tuned.group().phase(k, omega) * mag
    }
}

/// Centered (low-pass) GCM filter under `g`.
pub fn eval_centered_gcm(
    g: &GroupElement,
    params: &GcmParams,
    k: Vec2,
    omega: f64,
) -> Result<Complex64> {
    Ok(CenteredGcm::new(*g, *params)?.eval(k, omega))
}

/// Wavelet family for [`arp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArpKind {
    /// Morlet with center wave-number `|k0|` and anisotropy `epsilon`.
    /// The closed form assumes `|k0| >> 1`.
    Morlet { k0: f64, epsilon: f64 },
    /// Any conical wavelet with half-aperture `alpha`.
    Conical { alpha: f64 },
}

/// Angular resolving power in radians.
pub fn arp(kind: ArpKind) -> f64 {
    match kind {
        // cot^-1(x) = atan(1/x) for x > 0
        ArpKind::Morlet { k0, epsilon } => 2.0 * (1.0 / (k0 * epsilon.sqrt())).atan(),
        ArpKind::Conical { alpha } => 2.0 * alpha,
    }
}

/// Location of the maximum of `f` on the square grid
/// `[-half_extent, half_extent]^2` with spacing `step`. Ties resolve to the
/// first sample in row-major (ky, kx) order.
pub fn magnitude_argmax<F>(f: F, half_extent: f64, step: f64) -> Vec2
where
    F: Fn(Vec2) -> f64 + Sync,
{
    let n = (half_extent / step).round() as i64;
    let coord = |i: i64| i as f64 * step;
    let best = (-n..=n)
        .into_par_iter()
        .map(|iy| {
            let mut best = (f64::NEG_INFINITY, Vec2::ZERO);
            for ix in -n..=n {
                let k = Vec2::new(coord(ix), coord(iy));
                let v = f(k);
                if v > best.0 {
                    best = (v, k);
                }
            }
            best
        })
        .collect::<Vec<_>>();
    best.into_iter()
        .fold((f64::NEG_INFINITY, Vec2::ZERO), |acc, b| if b.0 > acc.0 { b } else { acc })
        .1
}
