//! Rotationally symmetric metrics g = ds² + W(s)² g₀ in arclength gauge.
//!
//! Scalar curvature R = −2(n−1)W″/W + (n−1)(n−2)(1 − W′²)/W², mean curvature of the level
//! spheres H = (n−1)W′/W for the outward normal ∂_s. Curvature is stored as the excess
//! R + n(n−1), which model families report exactly.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::fd::{central6, derivative};
use crate::numerics::grid::Grid;
use crate::numerics::ode::{dopri5, OdeOptions};
use crate::numerics::quadrature::cumulative_hermite;

/// W and its first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub w: f64,
    pub dw: f64,
    pub ddw: f64,
}

/// Scalar curvature from a jet.
pub fn curvature_from_jet(n: usize, j: &Jet) -> f64 {
    let nf = n as f64;
    -2.0 * (nf - 1.0) * j.ddw / j.w + (nf - 1.0) * (nf - 2.0) * (1.0 - j.dw * j.dw) / (j.w * j.w)
}

/// A warping function known in closed form or by a high-accuracy evaluator.
pub trait Profile: Send + Sync + Debug {
    fn dim(&self) -> usize;
    /// Arclength interval on which the profile is defined.
    fn domain(&self) -> (f64, f64);
    fn jet(&self, s: f64) -> Jet;
    /// R + n(n−1) at s.
    fn curvature_excess(&self, s: f64) -> f64 {
        let nf = self.dim() as f64;
        curvature_from_jet(self.dim(), &self.jet(s)) + nf * (nf - 1.0)
    }
    /// True when W(0) = 0 and W′(0) = 1 at the left end of the domain.
    fn center_regular(&self) -> bool {
        false
    }
    /// Taylor coefficients of W about `s0` up to `order`, when available.
    fn taylor(&self, _s0: f64, _order: usize) -> Option<Vec<f64>> {
        None
    }
}

/// W = sinh(k(s − shift))/k: hyperbolic space of curvature −k².
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicProfile {
    pub n: usize,
    pub k: f64,
    pub shift: f64,
    pub s_hi: f64,
}

impl Profile for HyperbolicProfile {
    fn dim(&self) -> usize {
        self.n
    }
    fn domain(&self) -> (f64, f64) {
        (self.shift.max(0.0), self.s_hi)
    }
    fn jet(&self, s: f64) -> Jet {
        let x = self.k * (s - self.shift);
        Jet { w: x.sinh() / self.k, dw: x.cosh(), ddw: self.k * x.sinh() }
    }
    fn curvature_excess(&self, _s: f64) -> f64 {
        let nf = self.n as f64;
        nf * (nf - 1.0) * (1.0 - self.k * self.k)
    }
    fn center_regular(&self) -> bool {
        self.shift == 0.0
    }
    fn taylor(&self, s0: f64, order: usize) -> Option<Vec<f64>> {
        let x = self.k * (s0 - self.shift);
        let (sh, ch) = (x.sinh(), x.cosh());
        let mut c = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        let mut kp = 1.0 / self.k;
        for j in 0..=order {
            if j > 0 {
                fact *= j as f64;
                kp *= self.k;
            }
            c.push(if j % 2 == 0 { sh } else { ch } * kp / fact);
        }
        Some(c)
    }
}

/// Round cylinder W ≡ c.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderProfile {
    pub n: usize,
    pub c: f64,
    pub s_lo: f64,
    pub s_hi: f64,
}

impl Profile for CylinderProfile {
    fn dim(&self) -> usize {
        self.n
    }
    fn domain(&self) -> (f64, f64) {
        (self.s_lo, self.s_hi)
    }
    fn jet(&self, _s: f64) -> Jet {
        Jet { w: self.c, dw: 0.0, ddw: 0.0 }
    }
}

const TAYLOR_ORDER: usize = 32;

#[derive(Debug, Clone)]
struct Patch {
    anchor: f64,
    coeffs: Vec<f64>,
}

/// AdS-Schwarzschild exterior: W′ = √V(W), V(r) = 1 + r² − 2m r^{2−n}, W(s_ref) = r_lo.
///
/// W is evaluated from Taylor patches of the second-order equation W″ = W + m(n−2)W^{1−n}
/// so that it is smooth to rounding level; W′ and W″ are taken from the first integral.
#[derive(Debug, Clone)]
pub struct AdsSchwarzschildProfile {
    pub n: usize,
    pub m: f64,
    pub r_lo: f64,
    pub s_ref: f64,
    pub s_hi: f64,
    patches: Vec<Patch>,
}

fn ads_v(n: usize, m: f64, r: f64) -> f64 {
    1.0 + r * r - 2.0 * m * r.powi(2 - n as i32)
}

/// Taylor coefficients of the solution of W″ = W + μ W^{1−n} with W = a₀, W′ = a₁ at the anchor.
fn ads_taylor(n: usize, mu: f64, a0: f64, a1: f64, order: usize) -> Vec<f64> {
    let alpha = 1.0 - n as f64;
    let mut a = vec![0.0; order + 1];
    let mut q = vec![0.0; order + 1];
    a[0] = a0;
    a[1] = a1;
    q[0] = a0.powf(alpha);
    for k in 0..=order.saturating_sub(2) {
        if k >= 1 {
            // power-series power rule for q = a^α
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((alpha + 1.0) * j as f64 - k as f64) * a[j] * q[k - j];
            }
            q[k] = acc / (k as f64 * a0);
        }
        a[k + 2] = (a[k] + mu * q[k]) / ((k + 2) as f64 * (k + 1) as f64);
    }
    a
}

fn horner(c: &[f64], d: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut ddp = 0.0;
    for &ck in c.iter().rev() {
        ddp = ddp * d + 2.0 * dp;
        dp = dp * d + p;
        p = p * d + ck;
    }
    (p, dp, ddp)
}

impl AdsSchwarzschildProfile {
    pub fn new(n: usize, m: f64, r_lo: f64, s_ref: f64, s_hi: f64) -> Result<Self> {
        if n < 3 || !(m >= 0.0) || !(r_lo > 0.0) || !(s_hi > s_ref) {
            return Err(Error::InvalidInput(format!(
                "AdS-Schwarzschild parameters n = {n}, m = {m}, r_lo = {r_lo}, [{s_ref}, {s_hi}]"
            )));
        }
        // V is increasing in r, so positivity at r_lo covers the whole exterior.
        let v0 = ads_v(n, m, r_lo);
        if !(v0 > 0.0) {
            return Err(Error::Hypothesis(format!("V(r_lo) = {v0} ≤ 0: r_lo lies inside the horizon")));
        }
        let mu = m * (n as f64 - 2.0);
        let mut patches = Vec::new();
        if m > 0.0 {
            let (mut w, mut dw) = (r_lo, v0.sqrt());
            let mut anchor = s_ref;
            loop {
                let coeffs = ads_taylor(n, mu, w, dw, TAYLOR_ORDER);
                // radius estimate from the trailing coefficients
                let mut radius = f64::INFINITY;
                for k in (TAYLOR_ORDER - 4)..=TAYLOR_ORDER {
                    let ratio = (coeffs[k].abs() / w.abs()).powf(-1.0 / k as f64);
                    if ratio.is_finite() {
                        radius = radius.min(ratio);
                    }
                }
                let step = (0.3 * radius).min(0.25);
                patches.push(Patch { anchor, coeffs });
                if anchor >= s_hi {
                    break;
                }
                let (pw, pdw, _) = horner(&patches.last().expect("patch").coeffs, step);
                w = pw;
                dw = pdw;
                anchor += step;
            }
        }
        Ok(AdsSchwarzschildProfile { n, m, r_lo, s_ref, s_hi, patches })
    }

    fn patch_at(&self, s: f64) -> &Patch {
        let i = self.patches.partition_point(|p| p.anchor <= s);
        &self.patches[i.saturating_sub(1)]
    }

    /// V(r).
    pub fn v(&self, r: f64) -> f64 {
        ads_v(self.n, self.m, r)
    }

    fn w_value(&self, s: f64) -> f64 {
        if self.m == 0.0 {
            return (s - self.s_ref + self.r_lo.asinh()).sinh();
        }
        let p = self.patch_at(s);
        horner(&p.coeffs, s - p.anchor).0
    }
}

impl Profile for AdsSchwarzschildProfile {
    fn dim(&self) -> usize {
        self.n
    }
    fn domain(&self) -> (f64, f64) {
        (self.s_ref, self.s_hi)
    }
    fn jet(&self, s: f64) -> Jet {
        let w = self.w_value(s);
        let dw = self.v(w).sqrt();
        let ddw = w + self.m * (self.n as f64 - 2.0) * w.powi(1 - self.n as i32);
        Jet { w, dw, ddw }
    }
    fn curvature_excess(&self, _s: f64) -> f64 {
        0.0
    }
    fn taylor(&self, s0: f64, order: usize) -> Option<Vec<f64>> {
        if self.m == 0.0 {
            let h = HyperbolicProfile { n: self.n, k: 1.0, shift: self.s_ref - self.r_lo.asinh(), s_hi: self.s_hi };
            return h.taylor(s0, order);
        }
        let w = self.w_value(s0);
        let mut c = ads_taylor(self.n, self.m * (self.n as f64 - 2.0), w, self.v(w).sqrt(), order.max(2));
        c.truncate(order + 1);
        Some(c)
    }
}

/// Independent route: integrate the shift y = s − asinh W with Dormand–Prince 5(4).
///
/// dy/ds = 1 − √(1 − 2mW^{2−n}/(1+W²)) with W = sinh(s − y); returns W at `points`.
pub fn ads_schwarzschild_dopri(n: usize, m: f64, r_lo: f64, s_ref: f64, points: &[f64], rtol: f64) -> Result<Vec<f64>> {
    let y0 = s_ref - r_lo.asinh();
    let rhs = |s: f64, y: &[f64], d: &mut [f64]| {
        let w = (s - y[0]).sinh();
        let x = 2.0 * m * w.powi(2 - n as i32) / (1.0 + w * w);
        d[0] = x / (1.0 + (1.0 - x).sqrt());
    };
    let out = dopri5(rhs, s_ref, &[y0], points, OdeOptions { rtol, atol: rtol * 1e-3, max_steps: 1_000_000 })?;
    Ok(points.iter().zip(out).map(|(s, y)| (s - y[0]).sinh()).collect())
}

/// One curvature record of the level sphere at s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSample {
    pub s: f64,
    pub r: f64,
    pub h: f64,
    pub norm_a2: f64,
    pub r_sigma: f64,
}

/// A warped metric sampled on a radial grid, optionally backed by an exact profile.
#[derive(Debug, Clone)]
pub struct WarpedMetric {
    n: usize,
    grid: Grid,
    w: Vec<f64>,
    dw: Vec<f64>,
    ddw: Vec<f64>,
    excess: Vec<f64>,
    center_regular: bool,
    profile: Option<Arc<dyn Profile>>,
}

impl WarpedMetric {
    /// Sample an exact profile on a grid.
    pub fn from_profile(profile: Arc<dyn Profile>, grid: Grid) -> Result<Self> {
        let n = profile.dim();
        let (lo, hi) = profile.domain();
        let s = &grid.s;
        if s.is_empty() || s[0] < lo - 1e-12 || *s.last().expect("grid") > hi + 1e-12 {
            return Err(Error::InvalidInput(format!("grid outside profile domain [{lo}, {hi}]")));
        }
        let center_regular = profile.center_regular() && s[0] == 0.0;
        let mut w = Vec::with_capacity(s.len());
        let mut dw = Vec::with_capacity(s.len());
        let mut ddw = Vec::with_capacity(s.len());
        let mut excess = Vec::with_capacity(s.len());
        for &si in s {
            let j = profile.jet(si);
            w.push(j.w);
            dw.push(j.dw);
            ddw.push(j.ddw);
            excess.push(profile.curvature_excess(si));
        }
        let g = WarpedMetric { n, grid, w, dw, ddw, excess, center_regular, profile: Some(profile) };
        g.validate()?;
        Ok(g)
    }

    /// Metric from W samples alone; derivatives by fourth-order differences.
    pub fn from_samples(n: usize, grid: Grid, w: Vec<f64>) -> Result<Self> {
        if grid.len() != w.len() || grid.len() < 6 {
            return Err(Error::InvalidInput("from_samples: need matching samples on at least 6 nodes".into()));
        }
        let dw = derivative(&grid.s, &w, 1, 5);
        let ddw = derivative(&grid.s, &w, 2, 6);
        let center_regular = grid.s[0] == 0.0 && w[0] == 0.0;
        Self::from_jets(n, grid, w, dw, ddw, center_regular)
    }

    /// Metric from W, W′, W″ samples; curvature from the warped-product formula.
    pub fn from_jets(n: usize, grid: Grid, w: Vec<f64>, dw: Vec<f64>, ddw: Vec<f64>, center_regular: bool) -> Result<Self> {
        let m = grid.len();
        if w.len() != m || dw.len() != m || ddw.len() != m {
            return Err(Error::InvalidInput("from_jets: sample length mismatch".into()));
        }
        let nf = n as f64;
        let mut excess: Vec<f64> = (0..m)
            .map(|i| {
                if w[i] == 0.0 {
                    f64::NAN
                } else {
                    curvature_from_jet(n, &Jet { w: w[i], dw: dw[i], ddw: ddw[i] }) + nf * (nf - 1.0)
                }
            })
            .collect();
        if center_regular && m >= 4 {
            // quadratic extrapolation in s to the center
            let s = &grid.s;
            let (x1, x2, x3) = (s[1], s[2], s[3]);
            let (y1, y2, y3) = (excess[1], excess[2], excess[3]);
            let l1 = x2 * x3 / ((x1 - x2) * (x1 - x3));
            let l2 = x1 * x3 / ((x2 - x1) * (x2 - x3));
            let l3 = x1 * x2 / ((x3 - x1) * (x3 - x2));
            excess[0] = l1 * y1 + l2 * y2 + l3 * y3;
        }
        let g = WarpedMetric { n, grid, w, dw, ddw, excess, center_regular, profile: None };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInput(format!("dimension {} < 3", self.n)));
        }
        if !self.grid.s.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::InvalidInput("grid not strictly increasing".into()));
        }
        let start = usize::from(self.center_regular);
        if let Some(i) = (start..self.w.len()).find(|&i| !(self.w[i] > 0.0)) {
            return Err(Error::InvalidInput(format!("W = {} ≤ 0 at s = {}", self.w[i], self.grid.s[i])));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn s(&self) -> &[f64] {
        &self.grid.s
    }
    pub fn w(&self) -> &[f64] {
        &self.w
    }
    pub fn dw(&self) -> &[f64] {
        &self.dw
    }
    pub fn ddw(&self) -> &[f64] {
        &self.ddw
    }
    /// R + n(n−1) at the nodes.
    pub fn excess(&self) -> &[f64] {
        &self.excess
    }
    pub fn center_regular(&self) -> bool {
        self.center_regular
    }
    pub fn profile(&self) -> Option<&Arc<dyn Profile>> {
        self.profile.as_ref()
    }
    pub fn domain(&self) -> (f64, f64) {
        (self.grid.s[0], *self.grid.s.last().expect("grid"))
    }

    /// Jet at an arbitrary s: exact when a profile is attached, cubic Hermite otherwise.
    pub fn eval(&self, s: f64) -> Jet {
        if let Some(p) = &self.profile {
            return p.jet(s);
        }
        let x = &self.grid.s;
        let i = x.partition_point(|&v| v <= s).clamp(1, x.len() - 1) - 1;
        let h = x[i + 1] - x[i];
        let t = (s - x[i]) / h;
        let (y0, y1, d0, d1) = (self.w[i], self.w[i + 1], self.dw[i] * h, self.dw[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let w = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
        let dw = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * d1) / h;
        let ddw = self.ddw[i] * (1.0 - t) + self.ddw[i + 1] * t;
        Jet { w, dw, ddw }
    }

    /// Scalar curvature at node i.
    pub fn scalar_curvature_at(&self, i: usize) -> f64 {
        let nf = self.n as f64;
        self.excess[i] - nf * (nf - 1.0)
    }

    /// Curvature record at node i.
    pub fn curvature_sample(&self, i: usize) -> CurvatureSample {
        let nf = self.n as f64;
        let (w, dw) = (self.w[i], self.dw[i]);
        CurvatureSample {
            s: self.grid.s[i],
            r: self.scalar_curvature_at(i),
            h: (nf - 1.0) * dw / w,
            norm_a2: (nf - 1.0) * (dw / w).powi(2),
            r_sigma: (nf - 1.0) * (nf - 2.0) / (w * w),
        }
    }

    /// Volume element W^{n−1} vol(S^{n−1}) at the nodes, without the sphere factor.
    pub fn area_density(&self) -> Vec<f64> {
        self.w.iter().map(|w| w.powi(self.n as i32 - 1)).collect()
    }
}

/// Hyperbolic space on a uniform grid [0, s_hi].
pub fn make_hyperbolic(n: usize, s_hi: f64, cells: usize) -> Result<WarpedMetric> {
    let p = HyperbolicProfile { n, k: 1.0, shift: 0.0, s_hi };
    WarpedMetric::from_profile(Arc::new(p), Grid::uniform(0.0, s_hi, cells)?)
}

/// AdS-Schwarzschild exterior on a uniform grid [s_ref, s_hi] with W(s_ref) = r_lo.
pub fn make_ads_schwarzschild(n: usize, m: f64, r_lo: f64, s_ref: f64, s_hi: f64, cells: usize) -> Result<WarpedMetric> {
    let p = AdsSchwarzschildProfile::new(n, m, r_lo, s_ref, s_hi)?;
    WarpedMetric::from_profile(Arc::new(p), Grid::uniform(s_ref, s_hi, cells)?)
}

/// Scalar curvature at s from the metric's jet.
pub fn scalar_curvature(g: &WarpedMetric, s: f64) -> Result<f64> {
    let (lo, hi) = g.domain();
    if !(s > lo && s < hi) {
        return Err(Error::InvalidInput(format!("scalar_curvature: s = {s} not interior to [{lo}, {hi}]")));
    }
    let nf = g.n as f64;
    Ok(match g.profile() {
        Some(p) => p.curvature_excess(s) - nf * (nf - 1.0),
        None => curvature_from_jet(g.n, &g.eval(s)),
    })
}

/// Mean curvature (n−1)W′/W of the level sphere at s.
pub fn mean_curvature(g: &WarpedMetric, s: f64) -> f64 {
    let j = g.eval(s);
    (g.n as f64 - 1.0) * j.dw / j.w
}

/// R − [R_Σ − (|A|² + H²) − 2 ∂H/∂s], with ∂H/∂s from sixth-order differences of H.
pub fn riccati_residual(g: &WarpedMetric, s: f64) -> Result<f64> {
    let (lo, hi) = g.domain();
    let h = 2e-3 * (s - lo).min(1.0);
    if !(h > 0.0 && s + 3.0 * h < hi) {
        return Err(Error::InvalidInput(format!("riccati_residual: s = {s} too close to the boundary")));
    }
    let nf = g.n as f64;
    let dh = central6(|x| mean_curvature(g, x), s, h);
    let j = g.eval(s);
    let r_sigma = (nf - 1.0) * (nf - 2.0) / (j.w * j.w);
    let hv = (nf - 1.0) * j.dw / j.w;
    let a2 = (nf - 1.0) * (j.dw / j.w).powi(2);
    Ok(scalar_curvature(g, s)? - (r_sigma - a2 - hv * hv - 2.0 * dh))
}

/// Positive conformal factor u with its first two s-derivatives on a metric's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub ddu: Vec<f64>,
}

impl ConformalFactor {
    /// Factor from samples; derivatives by fourth-order differences.
    pub fn from_samples(s: &[f64], u: Vec<f64>) -> Self {
        let du = derivative(s, &u, 1, 5);
        let ddu = derivative(s, &u, 2, 6);
        ConformalFactor { u, du, ddu }
    }

    /// u ≡ 1.
    pub fn identity(len: usize) -> Self {
        ConformalFactor { u: vec![1.0; len], du: vec![0.0; len], ddu: vec![0.0; len] }
    }
}

/// The metric u^{4/(n−2)} g written again as a warped product dŝ² + Ŵ² g₀ with
/// dŝ = u^{2/(n−2)} ds and Ŵ = u^{2/(n−2)} W.
pub fn conformal_reparametrize(g: &WarpedMetric, factor: &ConformalFactor) -> Result<WarpedMetric> {
    let m = g.grid.len();
    if factor.u.len() != m || factor.du.len() != m || factor.ddu.len() != m {
        return Err(Error::InvalidInput("conformal factor length mismatch".into()));
    }
    if let Some(i) = factor.u.iter().position(|&u| !(u > 0.0)) {
        return Err(Error::InvalidInput(format!("conformal factor {} ≤ 0 at s = {}", factor.u[i], g.grid.s[i])));
    }
    let p = 2.0 / (g.n as f64 - 2.0);
    let s = &g.grid.s;
    // ŝ = s + ∫ (u^p − 1) ds, integrated in this form to keep ŝ − s accurate
    let y: Vec<f64> = factor.u.iter().map(|&u| (p * u.ln()).exp_m1()).collect();
    let dy: Vec<f64> = (0..m).map(|i| p * factor.u[i].powf(p - 1.0) * factor.du[i]).collect();
    let extra = cumulative_hermite(s, &y, &dy);
    let s_hat: Vec<f64> = s.iter().zip(&extra).map(|(a, b)| a + b).collect();
    let mut w = Vec::with_capacity(m);
    let mut dw = Vec::with_capacity(m);
    let mut ddw = Vec::with_capacity(m);
    for i in 0..m {
        let (u, du, ddu) = (factor.u[i], factor.du[i], factor.ddu[i]);
        let up = u.powf(p);
        let (wv, wp, wpp) = (g.w[i], g.dw[i], g.ddw[i]);
        w.push(up * wv);
        dw.push(wp + p * wv * du / u);
        ddw.push((wpp + p * (wp * du / u + wv * ddu / u - wv * du * du / (u * u))) / up);
    }
    WarpedMetric::from_jets(g.n, Grid { s: s_hat }, w, dw, ddw, g.center_regular)
}

/// Rows `s,W,Wprime,R,H` for the metric dump.
pub fn dump_rows(g: &WarpedMetric) -> Vec<[f64; 5]> {
    (0..g.grid.len())
        .map(|i| {
            let c = g.curvature_sample(i);
            [c.s, g.w[i], g.dw[i], c.r, if g.w[i] > 0.0 { c.h } else { f64::NAN }]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::adaptive_gk;

    #[test]
    fn hyperbolic_curvature_and_mean_curvature() {
        let g = make_hyperbolic(3, 10.0, 1000).unwrap();
        for i in 1..g.grid().len() {
            assert_eq!(g.scalar_curvature_at(i), -6.0);
        }
        let s0 = 1f64.asinh();
        assert!((mean_curvature(&g, s0) - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((curvature_from_jet(3, &g.eval(2.3)) + 6.0).abs() < 1e-13);
        assert!(riccati_residual(&g, 2.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn ads_schwarzschild_values() {
        let s0 = 1f64.asinh();
        let g = make_ads_schwarzschild(3, 0.1, 1.0, s0, 20.0, 2000).unwrap();
        assert!((g.dw()[0] - 1.8f64.sqrt()).abs() < 1e-15);
        assert!((mean_curvature(&g, s0) - 2.0 * 1.8f64.sqrt()).abs() < 1e-14);
        for i in 0..g.grid().len() {
            let r = curvature_from_jet(3, &Jet { w: g.w()[i], dw: g.dw()[i], ddw: g.ddw()[i] });
            assert!((r + 6.0).abs() < 1e-8, "{r}");
        }
        assert!(AdsSchwarzschildProfile::new(3, 0.1, 0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn ads_taylor_matches_inversion_quadrature() {
        // s(r) − s_ref = ∫_{r_lo}^{r} dr/√V, evaluated independently
        let (n, m, r_lo, s_ref) = (4usize, 0.2, 0.9, 0.5);
        let p = AdsSchwarzschildProfile::new(n, m, r_lo, s_ref, 12.0).unwrap();
        for &r in &[0.95, 1.5, 3.0, 20.0, 300.0] {
            let ds = adaptive_gk(|x| 1.0 / p.v(x).sqrt(), r_lo, r, 1e-15, 1e-15).value;
            let w = p.jet(s_ref + ds).w;
            assert!((w / r - 1.0).abs() < 1e-12, "r = {r}: {w}");
        }
    }

    #[test]
    fn ads_taylor_matches_dopri() {
        let (n, m, r_lo, s_ref) = (3usize, 0.1, 1.0, 1f64.asinh());
        let p = AdsSchwarzschildProfile::new(n, m, r_lo, s_ref, 20.0).unwrap();
        let pts: Vec<f64> = (1..=20).map(|k| s_ref + k as f64 * 0.9).collect();
        let w = ads_schwarzschild_dopri(n, m, r_lo, s_ref, &pts, 1e-12).unwrap();
        for (s, wv) in pts.iter().zip(&w) {
            assert!((p.jet(*s).w / wv - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ads_zero_mass_is_shifted_hyperbolic() {
        let p = AdsSchwarzschildProfile::new(3, 0.0, 1.0, 0.3, 5.0).unwrap();
        let shift = 0.3 - 1f64.asinh();
        assert!((p.jet(2.0).w / (2.0 - shift).sinh() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cylinder() {
        let p = CylinderProfile { n: 4, c: 2.0, s_lo: 0.0, s_hi: 5.0 };
        let g = WarpedMetric::from_profile(Arc::new(p), Grid::uniform(0.0, 5.0, 50).unwrap()).unwrap();
        assert!((scalar_curvature(&g, 1.0).unwrap() - 3.0 * 2.0 / 4.0).abs() < 1e-15);
        assert_eq!(mean_curvature(&g, 1.0), 0.0);
        assert!(riccati_residual(&g, 2.5).unwrap().abs() < 1e-14);
    }

    #[test]
    fn sampled_metric_curvature() {
        let grid = Grid::uniform(0.0, 6.0, 600).unwrap();
        let w: Vec<f64> = grid.s.iter().map(|s| s.sinh()).collect();
        let g = WarpedMetric::from_samples(3, grid, w).unwrap();
        assert!(g.center_regular());
        for i in 3..g.grid().len() {
            assert!((g.scalar_curvature_at(i) + 6.0).abs() < 1e-5, "{i}: {}", g.scalar_curvature_at(i));
        }
        assert!((g.scalar_curvature_at(0) + 6.0).abs() < 1e-3);
    }

    #[test]
    fn conformal_identity_and_constant_factor() {
        let g = make_hyperbolic(3, 8.0, 800).unwrap();
        let same = conformal_reparametrize(&g, &ConformalFactor::identity(g.grid().len())).unwrap();
        assert_eq!(same.w(), g.w());
        assert_eq!(same.s(), g.s());
        // constant u: R̂ = u^{−4/(n−2)} R
        let n = 5usize;
        let g = make_hyperbolic(n, 8.0, 800).unwrap();
        let u = 1.3f64;
        let f = ConformalFactor { u: vec![u; 801], du: vec![0.0; 801], ddu: vec![0.0; 801] };
        let h = conformal_reparametrize(&g, &f).unwrap();
        let expect = u.powf(-4.0 / 3.0) * -20.0;
        for i in 1..801 {
            assert!((h.scalar_curvature_at(i) - expect).abs() < 1e-9, "{i} {} {expect}", h.scalar_curvature_at(i));
        }
        assert!(conformal_reparametrize(&g, &ConformalFactor { u: vec![-1.0; 801], ..f }).is_err());
    }
}
