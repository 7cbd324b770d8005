//! Corner manifolds and their smoothing at scale ν.
//!
//! A corner manifold glues an inside warping function W₋ on [0, s₀] to an outside W₊ on
//! [s₀, s_hi] with W continuous and W′ jumping by J = W′₊(s₀) − W′₋(s₀). Writing the glued
//! function as W₋ + H(d) D with d = s − s₀ and D = W₊ − W₋ (so D(s₀) = 0), the smoothed
//! function is
//!
//! W_ν = W₋ + χ(d) (H D) ∗ φ_ε + (1 − χ(d)) H D,   ε = ν²/100,
//!
//! where φ_ε is the unit-mass mollifier at scale ε and χ is a smooth cutoff equal to 1 for
//! |d| ≤ ν/4 and 0 for |d| ≥ ν/2. Since (H D)″ = H D″ + J δ, the second derivative carries
//! the spike J φ_ε(d), and R_ν contains 2(H₋ − H₊) φ_ε(d) up to a bounded remainder.
//! Outside the collar |d| < ν/2 the base pieces are returned unchanged.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::grid::{GradedSpec, Grid};
use crate::numerics::quadrature::{sample_weights, tanh_sinh};
use crate::numerics::special::sphere_area;
use crate::warped_geometry::{curvature_from_jet, Jet, Profile, WarpedMetric};

const JUMP_ORDER: usize = 30;
const MOMENTS: usize = 4;

struct MollifierConstants {
    z: f64,
    /// ∫ t^{2k} φ(t) dt for k = 0..MOMENTS
    even_moments: Vec<f64>,
}

fn raw_bump(one_plus: f64, one_minus: f64) -> f64 {
    let q = one_plus * one_minus;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn constants() -> &'static MollifierConstants {
    static C: OnceLock<MollifierConstants> = OnceLock::new();
    C.get_or_init(|| {
        let z = tanh_sinh(|_, da, db| raw_bump(da, db), -1.0, 1.0, 1e-15).value;
        let even_moments = (0..=MOMENTS)
            .map(|k| tanh_sinh(|t, da, db| t.powi(2 * k as i32) * raw_bump(da, db), -1.0, 1.0, 1e-15).value / z)
            .collect();
        MollifierConstants { z, even_moments }
    })
}

/// Normalisation ∫ exp(−1/(1−t²)) dt over (−1, 1).
pub fn mollifier_normalisation() -> f64 {
    constants().z
}

/// The standard mollifier φ(t) = exp(−1/(1−t²))/Z on (−1, 1), zero elsewhere; ∫φ = 1.
pub fn mollifier(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    raw_bump(1.0 + t, 1.0 - t) / constants().z
}

/// ∫ t^{2k} φ(t) dt.
pub fn mollifier_moment(k: usize) -> f64 {
    constants().even_moments[k]
}

/// Smooth step ψ on [0, 1] with ψ(0) = 0, ψ(1) = 1, all derivatives vanishing at both ends.
/// Returns (ψ, ψ′, ψ″).
fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let q = 1.0 / x - 1.0 / (1.0 - x);
    let psi = 0.5 * (1.0 - (0.5 * q).tanh());
    let c = (0.5 * q).cosh();
    let pq = if c.is_finite() { 0.25 / (c * c) } else { 0.0 };
    let dq = -1.0 / (x * x) - 1.0 / ((1.0 - x) * (1.0 - x));
    let ddq = 2.0 / (x * x * x) - 2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x));
    let d1 = -pq * dq;
    let d2 = -(d1 * (1.0 - 2.0 * psi) * dq + pq * ddq);
    (psi, d1, d2)
}

fn poly_derivative(c: &[f64], order: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for k in (order..c.len()).rev() {
        let mut fall = 1.0;
        for j in 0..order {
            fall *= (k - j) as f64;
        }
        acc = acc * x + fall * c[k];
    }
    acc
}

/// Options for [`make_corner`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CornerOptions {
    /// Accept pieces with R < −n(n−1) (counterexample experiments).
    pub allow_hypothesis_violation: bool,
}

/// Inside and outside pieces glued at s₀.
#[derive(Debug, Clone)]
pub struct CornerManifold {
    n: usize,
    inside: Arc<dyn Profile>,
    outside: Arc<dyn Profile>,
    s0: f64,
    s_hi: f64,
    h_minus: f64,
    h_plus: f64,
    hypothesis_ok: bool,
    jump: Vec<f64>,
}

/// Glue two sampled metrics (each backed by an exact profile) at s₀.
pub fn make_corner(inside: &WarpedMetric, outside: &WarpedMetric, s0: f64, opts: CornerOptions) -> Result<CornerManifold> {
    let n = inside.n();
    if outside.n() != n {
        return Err(Error::InvalidInput("corner pieces have different dimensions".into()));
    }
    if !inside.center_regular() {
        return Err(Error::InvalidInput("inside piece must be center-regular".into()));
    }
    let (pin, pout) = match (inside.profile(), outside.profile()) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        _ => return Err(Error::InvalidInput("corner pieces need exact profiles".into())),
    };
    let jin = pin.jet(s0);
    let jout = pout.jet(s0);
    if (jin.w - jout.w).abs() > 1e-10 * jin.w.abs().max(1.0) {
        return Err(Error::InvalidInput(format!("warping mismatch at s0: W− = {}, W+ = {}", jin.w, jout.w)));
    }
    let worst = inside
        .excess()
        .iter()
        .chain(outside.excess())
        .fold(f64::INFINITY, |a, &b| if b.is_nan() { a } else { a.min(b) });
    let hypothesis_ok = worst >= -1e-8;
    if !hypothesis_ok && !opts.allow_hypothesis_violation {
        return Err(Error::Hypothesis(format!("scalar curvature below −n(n−1) by {:e}", -worst)));
    }
    let tin = pin.taylor(s0, JUMP_ORDER).ok_or_else(|| Error::InvalidInput("inside profile lacks Taylor data".into()))?;
    let tout = pout.taylor(s0, JUMP_ORDER).ok_or_else(|| Error::InvalidInput("outside profile lacks Taylor data".into()))?;
    let mut jump: Vec<f64> = tout.iter().zip(&tin).map(|(a, b)| a - b).collect();
    jump[0] = 0.0;
    let nf = n as f64;
    Ok(CornerManifold {
        n,
        inside: pin,
        outside: pout,
        s0,
        s_hi: outside.domain().1,
        h_minus: (nf - 1.0) * jin.dw / jin.w,
        h_plus: (nf - 1.0) * jout.dw / jout.w,
        hypothesis_ok,
        jump,
    })
}

impl CornerManifold {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn s0(&self) -> f64 {
        self.s0
    }
    pub fn s_hi(&self) -> f64 {
        self.s_hi
    }
    pub fn h_minus(&self) -> f64 {
        self.h_minus
    }
    pub fn h_plus(&self) -> f64 {
        self.h_plus
    }
    /// Both pieces satisfy R ≥ −n(n−1) on their grids.
    pub fn hypothesis_ok(&self) -> bool {
        self.hypothesis_ok
    }
    /// H₋ ≥ H₊.
    pub fn mean_curvature_condition(&self) -> bool {
        self.h_minus >= self.h_plus
    }
    /// Jump W′₊(s₀) − W′₋(s₀).
    pub fn derivative_jump(&self) -> f64 {
        self.jump[1]
    }
    /// Largest admissible ν.
    pub fn nu_max(&self) -> f64 {
        let inside_reach = self.inside.domain().1 - self.s0;
        (2.0 * self.s0).min(2.0 * (self.s_hi - self.s0)).min(2.0 * inside_reach).min(0.5)
    }
    /// The unsmoothed glued profile.
    pub fn glued(&self) -> Arc<dyn Profile> {
        Arc::new(GluedProfile { corner: self.clone() })
    }
    fn base_jet(&self, s: f64) -> Jet {
        if s <= self.s0 {
            self.inside.jet(s)
        } else {
            self.outside.jet(s)
        }
    }
    fn base_excess(&self, s: f64) -> f64 {
        if s <= self.s0 {
            self.inside.curvature_excess(s)
        } else {
            self.outside.curvature_excess(s)
        }
    }
}

#[derive(Debug)]
struct GluedProfile {
    corner: CornerManifold,
}

impl Profile for GluedProfile {
    fn dim(&self) -> usize {
        self.corner.n
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.corner.s_hi)
    }
    fn jet(&self, s: f64) -> Jet {
        self.corner.base_jet(s)
    }
    fn curvature_excess(&self, s: f64) -> f64 {
        self.corner.base_excess(s)
    }
    fn center_regular(&self) -> bool {
        self.corner.inside.center_regular()
    }
}

/// The smoothed warping function as an exact profile.
#[derive(Debug)]
pub struct SmoothedProfile {
    corner: CornerManifold,
    nu: f64,
    eps: f64,
}

impl SmoothedProfile {
    fn cutoff(&self, d: f64) -> (f64, f64, f64) {
        let q = 0.25 * self.nu;
        let x = (0.5 * self.nu - d.abs()) / q;
        let (p, dp, ddp) = smooth_step(x);
        let sign = if d >= 0.0 { -1.0 } else { 1.0 };
        (p, sign * dp / q, ddp / (q * q))
    }

    /// (H D) ∗ φ_ε and its first two derivatives at offset d inside the core, spike included.
    fn core_convolution(&self, d: f64) -> [f64; 3] {
        let eps = self.eps;
        let tau = (d / eps).min(1.0);
        if tau <= -1.0 {
            return [0.0; 3];
        }
        let c = &self.corner.jump;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            let r = tanh_sinh(
                |t, da, db| {
                    let one_minus = if tau >= 1.0 { db } else { (1.0 - tau) + db };
                    poly_derivative(c, j, d - eps * t) * raw_bump(da, one_minus)
                },
                -1.0,
                tau,
                1e-15,
            );
            *o = r.value / constants().z;
        }
        out[2] += c[1] * mollifier(d / eps) / eps;
        out
    }

    /// (H D) ∗ φ_ε − D and derivatives for ε < d, from the even moments of φ.
    fn moment_correction(&self, d: f64) -> [f64; 3] {
        let c = &self.corner.jump;
        let mut out = [0.0; 3];
        let mut e2k = 1.0;
        let mut fact = 1.0;
        for k in 1..=MOMENTS {
            e2k *= self.eps * self.eps;
            fact *= ((2 * k - 1) * 2 * k) as f64;
            let w = e2k * mollifier_moment(k) / fact;
            for (j, o) in out.iter_mut().enumerate() {
                *o += w * poly_derivative(c, j + 2 * k, d);
            }
        }
        out
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn corner(&self) -> &CornerManifold {
        &self.corner
    }
}

impl Profile for SmoothedProfile {
    fn dim(&self) -> usize {
        self.corner.n
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.corner.s_hi)
    }
    fn center_regular(&self) -> bool {
        self.corner.inside.center_regular()
    }
    fn jet(&self, s: f64) -> Jet {
        let d = s - self.corner.s0;
        if d.abs() >= 0.5 * self.nu || d <= -self.eps {
            return self.corner.base_jet(s);
        }
        let wm = self.corner.inside.jet(s);
        if d.abs() <= self.eps {
            let k = self.core_convolution(d);
            return Jet { w: wm.w + k[0], dw: wm.dw + k[1], ddw: wm.ddw + k[2] };
        }
        let c = &self.corner.jump;
        let (chi, dchi, ddchi) = self.cutoff(d);
        let m = self.moment_correction(d);
        let dd = [poly_derivative(c, 0, d), poly_derivative(c, 1, d), poly_derivative(c, 2, d)];
        Jet {
            w: wm.w + dd[0] + chi * m[0],
            dw: wm.dw + dd[1] + dchi * m[0] + chi * m[1],
            ddw: wm.ddw + dd[2] + ddchi * m[0] + 2.0 * dchi * m[1] + chi * m[2],
        }
    }
    fn curvature_excess(&self, s: f64) -> f64 {
        let d = s - self.corner.s0;
        if d.abs() >= 0.5 * self.nu || d <= -self.eps {
            return self.corner.base_excess(s);
        }
        let n = self.corner.n;
        let base = self.corner.base_jet(s);
        curvature_from_jet(n, &self.jet(s)) - curvature_from_jet(n, &base) + self.corner.base_excess(s)
    }
}

/// Grid resolution used by [`smooth`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingGrid {
    /// Nodes across the core [−ε, ε].
    pub core_points: usize,
    /// Spacing growth rate away from the core.
    pub growth: f64,
    /// Largest spacing.
    pub h_max: f64,
}

impl Default for SmoothingGrid {
    fn default() -> Self {
        SmoothingGrid { core_points: 64, growth: 0.02, h_max: 0.01 }
    }
}

/// A corner smoothed at scale ν, sampled on a grid refined around s₀.
#[derive(Debug, Clone)]
pub struct SmoothedMetric {
    pub metric: WarpedMetric,
    pub glued: WarpedMetric,
    pub profile: Arc<SmoothedProfile>,
    pub nu: f64,
    pub collar: (f64, f64),
    pub core: (f64, f64),
}

/// The graded grid used for a given ν.
pub fn smoothing_grid(corner: &CornerManifold, nu: f64, res: &SmoothingGrid) -> Result<Grid> {
    let eps = nu * nu / 100.0;
    Grid::graded(&GradedSpec {
        lo: 0.0,
        hi: corner.s_hi,
        center: corner.s0,
        h_core: 2.0 * eps / res.core_points as f64,
        core_half: eps,
        growth: res.growth,
        h_max: res.h_max,
    })
}

/// Smooth the corner at scale ν on the default grid.
pub fn smooth(corner: &CornerManifold, nu: f64) -> Result<SmoothedMetric> {
    smooth_with(corner, nu, &SmoothingGrid::default())
}

/// Smooth the corner at scale ν with explicit grid resolution.
pub fn smooth_with(corner: &CornerManifold, nu: f64, res: &SmoothingGrid) -> Result<SmoothedMetric> {
    let nu_max = corner.nu_max();
    if !(nu > 0.0 && nu < nu_max) {
        return Err(Error::InvalidInput(format!("ν = {nu} outside (0, {nu_max})")));
    }
    let grid = smoothing_grid(corner, nu, res)?;
    let eps = nu * nu / 100.0;
    let profile = Arc::new(SmoothedProfile { corner: corner.clone(), nu, eps });
    let metric = WarpedMetric::from_profile(profile.clone(), grid.clone())?;
    let glued = WarpedMetric::from_profile(corner.glued(), grid)?;
    let s0 = corner.s0;
    Ok(SmoothedMetric {
        metric,
        glued,
        profile,
        nu,
        collar: (s0 - 0.5 * nu, s0 + 0.5 * nu),
        core: (s0 - eps, s0 + eps),
    })
}

/// Spike term 2(H₋ − H₊)(100/ν²) φ(100 d/ν²).
pub fn spike(corner: &CornerManifold, nu: f64, d: f64) -> f64 {
    let eps = nu * nu / 100.0;
    2.0 * (corner.h_minus - corner.h_plus) * mollifier(d / eps) / eps
}

/// One row of the smoothed curvature profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSample {
    pub d: f64,
    pub r: f64,
    pub spike: f64,
    pub f: f64,
    pub in_core: bool,
}

/// Curvature profile across the collar.
pub fn smoothed_scalar_profile(sm: &SmoothedMetric) -> Vec<SmoothingSample> {
    let corner = sm.profile.corner();
    let g = &sm.metric;
    let f = f_source(g);
    let s0 = corner.s0();
    g.s()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > sm.collar.0 && s < sm.collar.1)
        .map(|(i, &s)| {
            let d = s - s0;
            SmoothingSample {
                d,
                r: g.scalar_curvature_at(i),
                spike: spike(corner, sm.nu, d),
                f: f[i],
                in_core: d.abs() <= sm.profile.eps(),
            }
        })
        .collect()
}

/// ∫ ((R + n(n−1))⁻)^{n/2} dvol.
pub fn negative_part_norm(g: &WarpedMetric) -> f64 {
    let p = g.n() as f64 / 2.0;
    let y: Vec<f64> = g
        .excess()
        .iter()
        .zip(g.area_density())
        .map(|(&e, a)| if e < 0.0 { (-e).powf(p) * a } else { 0.0 })
        .collect();
    sphere_area(g.n()) * sample_weights(g.s()).iter().zip(&y).map(|(w, v)| w * v).sum::<f64>()
}

/// f = −(n−2)/(4(n−1)) (R + n(n−1))⁻ at the nodes.
pub fn f_source(g: &WarpedMetric) -> Vec<f64> {
    let nf = g.n() as f64;
    let c = (nf - 2.0) / (4.0 * (nf - 1.0));
    g.excess().iter().map(|&e| if e < 0.0 { c * e } else { 0.0 }).collect()
}

/// ∫ |f|^{n/2} dvol.
pub fn f_norm(g: &WarpedMetric, f: &[f64]) -> f64 {
    let p = g.n() as f64 / 2.0;
    let y: Vec<f64> = f.iter().zip(g.area_density()).map(|(v, a)| v.abs().powf(p) * a).collect();
    sphere_area(g.n()) * sample_weights(g.s()).iter().zip(&y).map(|(w, v)| w * v).sum::<f64>()
}

/// ∫_collar (R_ν − R_glued) W_ν^{n−1} ds.
pub fn collar_curvature_integral(sm: &SmoothedMetric) -> f64 {
    let g = &sm.metric;
    let idx: Vec<usize> = (0..g.s().len())
        .filter(|&i| g.s()[i] >= sm.collar.0 && g.s()[i] <= sm.collar.1)
        .collect();
    let x: Vec<f64> = idx.iter().map(|&i| g.s()[i]).collect();
    let y: Vec<f64> = idx
        .iter()
        .map(|&i| (g.excess()[i] - sm.glued.excess()[i]) * g.w()[i].powi(g.n() as i32 - 1))
        .collect();
    sample_weights(&x).iter().zip(&y).map(|(w, v)| w * v).sum()
}
