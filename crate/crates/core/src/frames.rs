//! Frame-bound estimates for discretized wavelet families.
//!
//! The family is sampled at scales `a0^l`, speeds `c0^n`, rotations
//! `q * theta0` and translations on the lattice `(bx0, by0, tau0)`. The
//! bounds follow
//!
//! ```text
//! A = K (lambda_minus - gamma),  B = K (lambda_plus + gamma),
//! K = (2 pi)^(3/2) / (bx0 by0 tau0)
//! ```
//!
//! where `lambda_minus`/`lambda_plus` are the extrema of the tiling function
//! `Lambda(k, w)` and `gamma` collects the cross terms at the nonzero
//! translation-lattice points. Every supremum and infimum is taken over a
//! finite grid, so the results are estimates, not certified bounds.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{eval_gc_2d, eval_gcm, eval_morlet_1d, GcmParams, Vec2};
use crate::search::{golden_section_max, golden_section_min};

pub const REPORT_LABEL: &str = "estimate, not certificate";

/// Tails above this fraction of `lambda_plus` produce a warning.
pub const TAIL_WARNING: f64 = 1e-6;

/// Fourier magnitude `|psi(k, w)|` of a mother wavelet.
pub trait FrameKernel: Sync {
    fn magnitude(&self, k: Vec2, omega: f64) -> f64;

    /// Factors with `magnitude(k, w) == spatial(k) * temporal(w)`, when the
    /// kernel has them. Enables the precomputed grid path.
    fn separable(&self) -> Option<&dyn SeparableKernel> {
        None
    }
}

pub trait SeparableKernel: Sync {
    fn spatial(&self, k: Vec2) -> f64;
    fn temporal(&self, omega: f64) -> f64;
}

impl FrameKernel for GcmParams {
    fn magnitude(&self, k: Vec2, omega: f64) -> f64 {
        eval_gcm(k, omega, self).abs()
    }

    fn separable(&self) -> Option<&dyn SeparableKernel> {
        Some(self)
    }
}

impl SeparableKernel for GcmParams {
    fn spatial(&self, k: Vec2) -> f64 {
        eval_gc_2d(k, self).abs()
    }

    fn temporal(&self, omega: f64) -> f64 {
        eval_morlet_1d(omega, self.omega0)
    }
}

/// Indicator of one cell of the discretization lattice. Its tiling function
/// is exactly 1 wherever the truncation ranges reach, and its cross terms
/// vanish once the translation steps are small, so it forms a tight frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightStub {
    a0: f64,
    c0: f64,
    theta0: f64,
}

impl TightStub {
    /// Cell edges are pulled in by this relative amount so that lattice-image
    /// points never land on an edge through rounding.
    const SHIFT: f64 = 1e-9;

    pub fn new(disc: &Discretization) -> Self {
        Self {
            a0: disc.a0,
            c0: disc.c0,
            theta0: disc.theta0(),
        }
    }
}

impl FrameKernel for TightStub {
    fn magnitude(&self, k: Vec2, omega: f64) -> f64 {
        let lo = 1.0 - Self::SHIFT;
        let r = k.norm();
        if !(r >= lo && r < self.a0 * lo) {
            return 0.0;
        }
        let ratio = omega / r;
        if !(ratio >= lo && ratio < self.c0 * lo) {
            return 0.0;
        }
        let phi = (k.arg() + Self::SHIFT).rem_euclid(TAU);
        if phi < self.theta0 {
            1.0
        } else {
            0.0
        }
    }
}

/// Sampling lattice, truncation ranges and search resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Scale step (> 1).
    pub a0: f64,
    /// Speed step (> 1).
    pub c0: f64,
    /// Rotation step is `pi / q1`.
    pub q1: u32,
    /// Inclusive range of scale exponents `l`.
    pub scale_range: [i32; 2],
    /// Inclusive range of speed exponents `n`.
    pub speed_range: [i32; 2],
    /// Inclusive range of rotation indices `q`; one full turn is `2 q1` values.
    pub rotation_range: [i32; 2],
    pub bx0: f64,
    pub by0: f64,
    pub tau0: f64,
    /// Translation-lattice indices run over `[-M, M]^3 \ {0}`.
    pub lattice_extent: u32,
    /// Samples per axis for the extremum search.
    pub search_grid: usize,
    /// Samples per axis for the cross-term suprema.
    pub gamma_grid: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self::with_q1(16)
    }
}

impl Discretization {
    /// `a0 = c0 = 2`, exponents in `[-4, 4]`, one full rotation period of
    /// `theta0 = pi / q1`, translation steps 0.5 and a 64^3 search grid.
    pub fn with_q1(q1: u32) -> Self {
        Self {
            a0: 2.0,
            c0: 2.0,
            q1,
            scale_range: [-4, 4],
            speed_range: [-4, 4],
            rotation_range: [0, 2 * q1 as i32 - 1],
            bx0: 0.5,
            by0: 0.5,
            tau0: 0.5,
            lattice_extent: 1,
            search_grid: 64,
            gamma_grid: 16,
        }
    }

    pub fn theta0(&self) -> f64 {
        PI / self.q1 as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 1.0 && self.a0.is_finite()) {
            return Err(invalid("a0", format!("{} is not above 1", self.a0)));
        }
        if !(self.c0 > 1.0 && self.c0.is_finite()) {
            return Err(invalid("c0", format!("{} is not above 1", self.c0)));
        }
        if self.q1 == 0 {
            return Err(invalid("q1", "must be at least 1"));
        }
        for (name, r) in [
            ("scale_range", self.scale_range),
            ("speed_range", self.speed_range),
            ("rotation_range", self.rotation_range),
        ] {
            if r[0] > r[1] {
                return Err(invalid(name, format!("{r:?} is empty")));
            }
        }
        for (name, v) in [("bx0", self.bx0), ("by0", self.by0), ("tau0", self.tau0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} is not positive")));
            }
        }
        if self.lattice_extent == 0 {
            return Err(invalid("lattice_extent", "must be at least 1"));
        }
        if self.search_grid < 2 || self.gamma_grid < 2 {
            return Err(invalid("search_grid", "need at least 2 samples per axis"));
        }
        Ok(())
    }

    /// `(2 pi)^(3/2) / (bx0 by0 tau0)`.
    pub fn prefactor(&self) -> f64 {
        TAU.powf(1.5) / (self.bx0 * self.by0 * self.tau0)
    }

    fn full_turn(&self) -> bool {
        self.rotation_range[1] - self.rotation_range[0] + 1 >= 2 * self.q1 as i32
    }

    /// Upper end of the searched temporal band.
    fn omega_top(&self) -> f64 {
        self.a0 * self.c0.powf(2.0 / 3.0)
    }

    fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for l in self.scale_range[0]..=self.scale_range[1] {
            for n in self.speed_range[0]..=self.speed_range[1] {
                for q in self.rotation_range[0]..=self.rotation_range[1] {
                    out.push(self.term(l, n, q));
                }
            }
        }
        out
    }

    /// Terms one step outside the truncation box.
    fn ring(&self) -> Vec<Term> {
        let [l0, l1] = self.scale_range;
        let [n0, n1] = self.speed_range;
        let [q0, q1] = self.rotation_range;
        let (qa, qb) = if self.full_turn() { (q0, q1) } else { (q0 - 1, q1 + 1) };
        let mut out = Vec::new();
        for l in l0 - 1..=l1 + 1 {
            for n in n0 - 1..=n1 + 1 {
                for q in qa..=qb {
                    let inside = (l0..=l1).contains(&l) && (n0..=n1).contains(&n) && (q0..=q1).contains(&q);
                    if !inside {
                        out.push(self.term(l, n, q));
                    }
                }
            }
        }
        out
    }

    fn term(&self, l: i32, n: i32, q: i32) -> Term {
        let a = self.a0.powi(l);
        let nf = n as f64;
        Term {
            spatial: a * self.c0.powf(nf / 3.0),
            temporal: a * self.c0.powf(-2.0 * nf / 3.0),
            rotation: -(q as f64) * self.theta0(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    spatial: f64,
    temporal: f64,
    rotation: f64,
}

impl Term {
    fn k(&self, k: Vec2) -> Vec2 {
        k.rotate(self.rotation) * self.spatial
    }
}

/// Value of the tiling function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaValue {
    pub value: f64,
    /// Largest single term just outside the truncation ranges.
    pub tail: f64,
}

/// `Lambda(k, w) = sum |psi(a0^l c0^(n/3) r(-q theta0) k, a0^l c0^(-2n/3) w)|^2`
/// over the truncation ranges.
pub fn lambda_fn(k: Vec2, omega: f64, disc: &Discretization, kernel: &dyn FrameKernel) -> LambdaValue {
    let sq = |t: &Term| kernel.magnitude(t.k(k), t.temporal * omega).powi(2);
    LambdaValue {
        value: disc.terms().iter().map(sq).sum(),
        tail: disc.ring().iter().map(sq).fold(0.0, f64::max),
    }
}

/// Frame-bound estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBoundReport {
    pub label: String,
    pub discretization: Discretization,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    /// `[|k|, arg k, w]` of the located extrema.
    pub lambda_minus_at: [f64; 3],
    pub lambda_plus_at: [f64; 3],
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    /// `B / A`, absent when the report is invalid.
    pub ratio: Option<f64>,
    /// `A > 0`.
    pub valid: bool,
    /// Largest dropped term of the tiling sum at the two extrema.
    pub lambda_tail: f64,
    /// Largest cross term at the axial lattice points just outside the summed box.
    pub gamma_tail: f64,
    pub warnings: Vec<String>,
}

impl FrameBoundReport {
    /// `B / A`, with invalid reports ranked as infinitely bad.
    pub fn ratio_or_inf(&self) -> f64 {
        self.ratio.unwrap_or(f64::INFINITY)
    }
}

/// The searched period of the scale/rotation lattice: `|k|` in `[1, a0)`,
/// `arg k` in `[0, theta0)`, `w` in `[1, a0 c0^(2/3))`, radius and frequency
/// log-spaced.
#[derive(Debug, Clone, Copy)]
struct Domain {
    n: usize,
    ln_r: f64,
    theta0: f64,
    ln_w: f64,
}

impl Domain {
    fn new(disc: &Discretization, n: usize) -> Self {
        Self {
            n,
            ln_r: disc.a0.ln(),
            theta0: disc.theta0(),
            ln_w: disc.omega_top().ln(),
        }
    }

    fn spatial_points(&self) -> Vec<Vec2> {
        let n = self.n as f64;
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            let r = (self.ln_r * i as f64 / n).exp();
            for j in 0..self.n {
                out.push(Vec2::from_polar(r, self.theta0 * j as f64 / n));
            }
        }
        out
    }

    fn omegas(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.ln_w * i as f64 / self.n as f64).exp())
            .collect()
    }

    fn point(&self, c: [f64; 3]) -> (Vec2, f64) {
        (Vec2::from_polar(c[0].exp(), c[1]), c[2].exp())
    }

    /// Coordinates `[ln |k|, arg k, ln w]`.
    fn coords(&self, k: Vec2, omega: f64) -> [f64; 3] {
        [k.norm().ln(), k.arg().rem_euclid(TAU), omega.ln()]
    }

    fn cell(&self) -> [f64; 3] {
        let n = self.n as f64;
        [self.ln_r / n, self.theta0 / n, self.ln_w / n]
    }

    fn upper(&self) -> [f64; 3] {
        let c = self.cell();
        [self.ln_r - c[0] * 1e-6, self.theta0 - c[1] * 1e-6, self.ln_w - c[2] * 1e-6]
    }
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    value: f64,
    k: Vec2,
    omega: f64,
}

/// Grid extrema of the tiling function.
fn lambda_extrema(disc: &Discretization, kernel: &dyn FrameKernel, dom: &Domain) -> (Extremum, Extremum) {
    let points = dom.spatial_points();
    let omegas = dom.omegas();
    let terms = disc.terms();
    let per_point: Vec<(Extremum, Extremum)> = match kernel.separable() {
        Some(sep) => {
            // group terms by (l, n): they share the temporal factor
            let groups = group_terms(disc, &terms);
            let temporal: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| omegas.iter().map(|&w| sep.temporal(g.temporal * w).powi(2)).collect())
                .collect();
            points
                .par_iter()
                .map(|&k| {
                    let spatial: Vec<f64> = groups
                        .iter()
                        .map(|g| g.terms.iter().map(|t| sep.spatial(t.k(k)).powi(2)).sum())
                        .collect();
                    scan_omegas(k, &omegas, |iw| {
                        spatial.iter().zip(&temporal).map(|(s, t)| s * t[iw]).sum()
                    })
                })
                .collect()
        }
        None => points
            .par_iter()
            .map(|&k| {
                scan_omegas(k, &omegas, |iw| {
                    let w = omegas[iw];
                    terms
                        .iter()
                        .map(|t| kernel.magnitude(t.k(k), t.temporal * w).powi(2))
                        .sum()
                })
            })
            .collect(),
    };
    let mut lo = per_point[0].0;
    let mut hi = per_point[0].1;
    for (a, b) in &per_point[1..] {
        if a.value < lo.value {
            lo = *a;
        }
        if b.value > hi.value {
            hi = *b;
        }
    }
    (lo, hi)
}

fn scan_omegas(k: Vec2, omegas: &[f64], f: impl Fn(usize) -> f64) -> (Extremum, Extremum) {
    let mut lo = Extremum {
        value: f64::INFINITY,
        k,
        omega: omegas[0],
    };
    let mut hi = Extremum {
        value: f64::NEG_INFINITY,
        ..lo
    };
    for (iw, &omega) in omegas.iter().enumerate() {
        let v = f(iw);
        if v < lo.value {
            lo = Extremum { value: v, k, omega };
        }
        if v > hi.value {
            hi = Extremum { value: v, k, omega };
        }
    }
    (lo, hi)
}

struct TermGroup {
    temporal: f64,
    terms: Vec<Term>,
}

fn group_terms(disc: &Discretization, terms: &[Term]) -> Vec<TermGroup> {
    let per_group = (disc.rotation_range[1] - disc.rotation_range[0] + 1) as usize;
    terms
        .chunks(per_group)
        .map(|c| TermGroup {
            temporal: c[0].temporal,
            terms: c.to_vec(),
        })
        .collect()
}

/// Coordinate-wise golden-section polish within one grid cell of `start`.
fn polish(
    start: Extremum,
    dom: &Domain,
    maximize: bool,
    f: impl Fn(Vec2, f64) -> f64,
) -> Extremum {
    let cell = dom.cell();
    let upper = dom.upper();
    let mut c = dom.coords(start.k, start.omega);
    let mut best = start;
    for axis in 0..3 {
        let lo = (c[axis] - cell[axis]).max(0.0);
        let hi = (c[axis] + cell[axis]).min(upper[axis]);
        if !(hi > lo) {
            continue;
        }
        let eval = |x: f64| {
            let mut p = c;
            p[axis] = x;
            let (k, w) = dom.point(p);
            f(k, w)
        };
        let tol = cell[axis] * 1e-3;
        let m = if maximize {
            golden_section_max(eval, lo, hi, tol)
        } else {
            golden_section_min(eval, lo, hi, tol)
        };
        let better = if maximize { m.value > best.value } else { m.value < best.value };
        if better {
            c[axis] = m.x;
            let (k, omega) = dom.point(c);
            best = Extremum {
                value: m.value,
                k,
                omega,
            };
        }
    }
    best
}

/// `Gamma(u, tau) = sup_{k, w} sum |psi(S k, T w)| |psi(S (k - u), T (w - tau))|`
/// with the supremum over the coarse grid.
fn gamma_sup(
    disc: &Discretization,
    kernel: &dyn FrameKernel,
    dom: &Domain,
    u: Vec2,
    tau: f64,
) -> f64 {
    let points = dom.spatial_points();
    let omegas = dom.omegas();
    let terms = disc.terms();
    let per_point: Vec<f64> = match kernel.separable() {
        Some(sep) => {
            let groups = group_terms(disc, &terms);
            let temporal: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| {
                    omegas
                        .iter()
                        .map(|&w| sep.temporal(g.temporal * w) * sep.temporal(g.temporal * (w - tau)))
                        .collect()
                })
                .collect();
            points
                .par_iter()
                .map(|&k| {
                    let spatial: Vec<f64> = groups
                        .iter()
                        .map(|g| {
                            g.terms
                                .iter()
                                .map(|t| sep.spatial(t.k(k)) * sep.spatial(t.k(k - u)))
                                .sum()
                        })
                        .collect();
                    (0..omegas.len())
                        .map(|iw| spatial.iter().zip(&temporal).map(|(s, t)| s * t[iw]).sum::<f64>())
                        .fold(0.0, f64::max)
                })
                .collect()
        }
        None => points
            .par_iter()
            .map(|&k| {
                omegas
                    .iter()
                    .map(|&w| {
                        terms
                            .iter()
                            .map(|t| {
                                kernel.magnitude(t.k(k), t.temporal * w)
                                    * kernel.magnitude(t.k(k - u), t.temporal * (w - tau))
                            })
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            })
            .collect(),
    };
    per_point.into_iter().fold(0.0, f64::max)
}

fn gamma_at(disc: &Discretization, kernel: &dyn FrameKernel, dom: &Domain, m: [i32; 3]) -> f64 {
    let u = Vec2::new(TAU * m[0] as f64 / disc.bx0, TAU * m[1] as f64 / disc.by0);
    let tau = TAU * m[2] as f64 / disc.tau0;
    gamma_sup(disc, kernel, dom, u, tau)
}

/// `sum sqrt(Gamma(m) Gamma(-m))` over `[-M, M]^3 \ {0}`, each `Gamma`
/// evaluated once.
fn gamma_sum(disc: &Discretization, kernel: &dyn FrameKernel, dom: &Domain) -> f64 {
    let e = disc.lattice_extent as i32;
    let side = (2 * e + 1) as usize;
    let index = |m: [i32; 3]| {
        ((m[0] + e) as usize * side + (m[1] + e) as usize) * side + (m[2] + e) as usize
    };
    let mut points = Vec::new();
    for mx in -e..=e {
        for my in -e..=e {
            for p in -e..=e {
                points.push([mx, my, p]);
            }
        }
    }
    let values: Vec<f64> = points
        .iter()
        .map(|&m| if m == [0, 0, 0] { 0.0 } else { gamma_at(disc, kernel, dom, m) })
        .collect();
    points
        .iter()
        .filter(|&&m| m != [0, 0, 0])
        .map(|&m| (values[index(m)] * values[index([-m[0], -m[1], -m[2]])]).sqrt())
        .sum()
}

/// Largest cross term at the six axial points just outside the summed box,
/// the shell points closest to the origin.
fn gamma_tail(disc: &Discretization, kernel: &dyn FrameKernel, dom: &Domain) -> f64 {
    let e = disc.lattice_extent as i32 + 1;
    (0..3)
        .map(|axis| {
            let mut m = [0; 3];
            m[axis] = e;
            let plus = gamma_at(disc, kernel, dom, m);
            m[axis] = -e;
            (plus * gamma_at(disc, kernel, dom, m)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Estimates `A`, `B` and `B / A` for the discretized family of `kernel`.
pub fn estimate_bounds(disc: &Discretization, kernel: &dyn FrameKernel) -> Result<FrameBoundReport> {
    disc.validate()?;
    let dom = Domain::new(disc, disc.search_grid);
    let (lo, hi) = lambda_extrema(disc, kernel, &dom);
    let value = |k: Vec2, w: f64| lambda_fn(k, w, disc, kernel).value;
    let lo = polish(lo, &dom, false, value);
    let hi = polish(hi, &dom, true, value);
    let lambda_minus = lo.value.max(0.0);
    let lambda_plus = hi.value.max(lambda_minus);
    let lambda_tail = lambda_fn(lo.k, lo.omega, disc, kernel)
        .tail
        .max(lambda_fn(hi.k, hi.omega, disc, kernel).tail);

    let gdom = Domain::new(disc, disc.gamma_grid);
    let gamma = gamma_sum(disc, kernel, &gdom);
    let gamma_tail = gamma_tail(disc, kernel, &gdom);

    let k = disc.prefactor();
    let a = k * (lambda_minus - gamma);
    let b = k * (lambda_plus + gamma);
    let valid = a > 0.0;
    let mut warnings = Vec::new();
    if lambda_tail > TAIL_WARNING * lambda_plus {
        warnings.push(format!("tiling-sum truncation tail {lambda_tail:e} is not negligible"));
    }
    if gamma_tail > TAIL_WARNING * lambda_plus {
        warnings.push(format!("translation-lattice tail {gamma_tail:e} is not negligible"));
    }
    if !valid {
        warnings.push("lambda_minus - gamma <= 0: no frame bound established".to_string());
    }
    let at = |e: &Extremum| [e.k.norm(), e.k.arg().rem_euclid(TAU), e.omega];
    Ok(FrameBoundReport {
        label: REPORT_LABEL.to_string(),
        discretization: disc.clone(),
        lambda_minus,
        lambda_plus,
        lambda_minus_at: at(&lo),
        lambda_plus_at: at(&hi),
        gamma,
        a,
        b,
        ratio: valid.then(|| b / a),
        valid,
        lambda_tail,
        gamma_tail,
        warnings,
    })
}
