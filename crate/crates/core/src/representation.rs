//! Boundary/volume representation of the decay coefficient.
//!
//! Outside the sphere |y| = r₀ of the exterior chart y (|y| = sinh(s − σ), so the
//! hyperbolic metric is dR²/(1+R²) + R² g₀), the coefficient of ρⁿ in v splits as
//! A = A₋₁ + A₀ + A₁ + A₂ with
//!
//! A₀ = κ ∫_{|y|>r₀} (w − f v) k(ω, y) dvol,
//! A₁ = κ ∫_{|y|=r₀} ∂v/∂n k(ω, y) dσ,
//! A₂ = −κ ∫_{|y|=r₀} v ∂k/∂n dσ,
//!
//! k(ω, y) = (t_y − ω·y)^{−n}, t_y = √(1+|y|²), n the unit normal pointing into the ball.
//! A₋₁ collects the correction from the metric not being exactly hyperbolic outside r₀.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green_kernel::KernelTable;
use crate::mass_aspect::GaugeMap;
use crate::numerics::fit::linear_fit;
use crate::numerics::quadrature::{gauss_jacobi, gauss_legendre, sample_weights};
use crate::numerics::special::sphere_area;
use crate::radial_solver::SolveResult;
use crate::warped_geometry::WarpedMetric;

/// Kernel k(ω, y) = (t_y − ω·y)^{−n}.
pub fn kernel(omega: &[f64], y: &[f64]) -> f64 {
    let n = y.len();
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let t = (1.0 + r2).sqrt();
    let dot: f64 = omega.iter().zip(y).map(|(a, b)| a * b).sum();
    let gap = if dot > 0.0 { (1.0 + r2 - dot * dot) / (t + dot) } else { t - dot };
    gap.powi(-(n as i32))
}

/// Quadrature in x = cos φ over S^{n−1} for integrands depending on the polar angle only.
#[derive(Debug, Clone)]
pub struct AngularRule {
    n: usize,
    nodes: usize,
    legendre: (Vec<f64>, Vec<f64>),
    left: (Vec<f64>, Vec<f64>),
    right: (Vec<f64>, Vec<f64>),
}

impl AngularRule {
    pub fn new(n: usize, nodes: usize) -> Self {
        let a = (n as f64 - 3.0) / 2.0;
        AngularRule {
            n,
            nodes,
            legendre: gauss_legendre(nodes),
            left: gauss_jacobi(nodes, 0.0, a),
            right: gauss_jacobi(nodes, a, 0.0),
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// ∫_{S^{n−1}} F(cos φ) dσ₀ for F given as a function of (x, 1 − x); the peak of width
    /// ~1/R² at x = 1 is resolved by geometric subdivision.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, radius: f64, f: F) -> f64 {
        let a = (self.n as f64 - 3.0) / 2.0;
        let weight = |x: f64, om: f64| (om * (1.0 + x)).powf(a);
        let mut total = 0.0;
        // [−1, 0]: weight (1+x)^a in the rule
        let (xl, wl) = &self.left;
        let mut part = 0.0;
        for (u, w) in xl.iter().zip(wl) {
            let x = -1.0 + 0.5 * (u + 1.0);
            part += w * f(x, 1.0 - x) * (1.0 - x).powf(a);
        }
        total += part * 0.5f64.powf(a + 1.0);
        // (0, 1 − d_K): plain rule on geometric pieces, distances to 1 carried exactly
        let floor = 0.01 / (1.0 + radius * radius);
        let mut d = 1.0;
        let (xg, wg) = &self.legendre;
        while d > floor {
            let d_next = 0.25 * d;
            let c = 0.5 * (d + d_next);
            let h = 0.5 * (d - d_next);
            let mut part = 0.0;
            for (u, w) in xg.iter().zip(wg) {
                let om = c - h * u;
                let x = 1.0 - om;
                part += w * f(x, om) * weight(x, om);
            }
            total += part * h;
            d = d_next;
        }
        // [1 − d, 1]: weight (1−x)^a in the rule
        let (xr, wr) = &self.right;
        let mut part = 0.0;
        for (u, w) in xr.iter().zip(wr) {
            let om = 0.5 * d * (1.0 - u);
            let x = 1.0 - om;
            part += w * f(x, om) * (1.0 + x).powf(a);
        }
        total += part * (0.5 * d).powf(a + 1.0);
        total * sphere_area(self.n - 1)
    }
}

fn gap(radius: f64, om: f64) -> f64 {
    // t − R x with x = 1 − om
    let t = (1.0 + radius * radius).sqrt();
    1.0 / (t + radius) + radius * om
}

/// ∫_{S^{n−1}} k dσ₀ at |y| = R.
pub fn kernel_sphere_integral(rule: &AngularRule, radius: f64) -> f64 {
    let n = rule.n as i32;
    rule.integrate(radius, |_, om| gap(radius, om).powi(-n))
}

/// ∫_{S^{n−1}} (R − t x)(t − R x)^{−n−1} dσ₀, so that ∂k/∂n integrates to n times this.
pub fn kernel_normal_integral(rule: &AngularRule, radius: f64) -> f64 {
    let n = rule.n as i32;
    let t = (1.0 + radius * radius).sqrt();
    rule.integrate(radius, |_, om| (t * om - 1.0 / (t + radius)) * gap(radius, om).powi(-n - 1))
}

/// Product rule on S^{n−1}: (points, weights), polar angles by Gauss–Jacobi and the circle
/// by the trapezoid rule.
pub fn sphere_rule(n: usize, m: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if n == 2 {
        let pts = (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        return (pts, vec![2.0 * std::f64::consts::PI / m as f64; m]);
    }
    let a = (n as f64 - 3.0) / 2.0;
    let (xs, ws) = gauss_jacobi(m, a, a);
    let (sub, subw) = sphere_rule(n - 1, m);
    let mut pts = Vec::with_capacity(m * sub.len());
    let mut wts = Vec::with_capacity(m * sub.len());
    for (x, w) in xs.iter().zip(&ws) {
        let r = (1.0 - x * x).sqrt();
        for (p, pw) in sub.iter().zip(&subw) {
            let mut q = Vec::with_capacity(n);
            q.push(*x);
            q.extend(p.iter().map(|c| c * r));
            pts.push(q);
            wts.push(w * pw);
        }
    }
    (pts, wts)
}

/// ∫_{|y|=R} k(ω, y) dσ₀ by brute-force quadrature over the sphere in a fixed frame.
pub fn kernel_sphere_integral_direct(omega: &[f64], radius: f64, m: usize) -> f64 {
    let (pts, wts) = sphere_rule(omega.len(), m);
    pts.iter()
        .zip(&wts)
        .map(|(p, w)| {
            let y: Vec<f64> = p.iter().map(|c| c * radius).collect();
            w * kernel(omega, &y)
        })
        .sum()
}

/// A_ij = g_ij + (g y)_i (g y)_j/(1 − g(y, y)) for the metric written in the exterior chart.
pub fn osculating_matrix(y: &[f64], g: &WarpedMetric, gauge: &GaugeMap) -> Result<DMatrix<f64>> {
    let gm = chart_metric(y, g, gauge)?;
    let gy = &gm * nalgebra::DVector::from_column_slice(y);
    let gyy = gy.dot(&nalgebra::DVector::from_column_slice(y));
    if !(gyy < 1.0) {
        return Err(Error::InvalidInput("osculating matrix undefined: g(y, y) ≥ 1".into()));
    }
    Ok(&gm + &gy * gy.transpose() / (1.0 - gyy))
}

/// g_ij at chart point y.
pub fn chart_metric(y: &[f64], g: &WarpedMetric, gauge: &GaugeMap) -> Result<DMatrix<f64>> {
    let n = g.n();
    if y.len() != n {
        return Err(Error::InvalidInput("chart point has the wrong dimension".into()));
    }
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = gauge.sigma + r.asinh();
    let (lo, hi) = g.domain();
    if !(r > 0.0) || s < lo || s > hi || s <= gauge.sigma {
        return Err(Error::InvalidInput(format!("|y| = {r} is not an exterior point of the metric")));
    }
    let w = g.eval(s).w;
    let q = (w / r).powi(2);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let yy = y[i] * y[j] / (r * r);
        let d = if i == j { 1.0 } else { 0.0 };
        q * (d - yy) + yy / (1.0 + r * r)
    }))
}

/// The hyperbolic metric of the osculating model r_y(x)² = A_ij x_i x_j at x = y:
/// A − (A y)(A y)ᵀ/(1 + A(y, y)).
pub fn osculating_metric(a: &DMatrix<f64>, y: &[f64]) -> DMatrix<f64> {
    let yv = nalgebra::DVector::from_column_slice(y);
    let ay = a * &yv;
    let q = ay.dot(&yv);
    a - &ay * ay.transpose() / (1.0 + q)
}

/// Settings of the coefficient computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationConfig {
    /// Chart radius of the boundary sphere.
    pub r0: f64,
    pub omega: Vec<f64>,
    /// Nodes per angular piece.
    pub nodes: usize,
}

impl RepresentationConfig {
    pub fn new(n: usize, r0: f64) -> Self {
        let mut omega = vec![0.0; n];
        omega[n - 1] = 1.0;
        RepresentationConfig { r0, omega, nodes: 24 }
    }
}

/// Solution data on the boundary sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub index: usize,
    pub s: f64,
    /// Chart radius |y| at the boundary node.
    pub radius: f64,
    pub w: f64,
    pub v: f64,
    pub dv: f64,
}

/// Boundary data at the grid node closest to |y| = r₀.
pub fn boundary_data(g: &WarpedMetric, res: &SolveResult, cfg: &RepresentationConfig) -> Result<BoundaryData> {
    if !(cfg.r0 > 0.0) {
        return Err(Error::InvalidInput("r0 must be positive".into()));
    }
    let target = res.gauge.sigma + cfg.r0.asinh();
    let index = g.grid().nearest(target);
    let s = g.s()[index];
    if index == 0 || index + 1 >= g.s().len() || s <= res.gauge.sigma {
        return Err(Error::InvalidInput(format!("r0 = {} lies outside the grid", cfg.r0)));
    }
    Ok(BoundaryData { index, s, radius: (s - res.gauge.sigma).sinh(), w: g.w()[index], v: res.v[index], dv: res.dv[index] })
}

/// A value with a quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn converged<F: Fn(&AngularRule) -> f64>(n: usize, nodes: usize, f: F) -> Result<Estimate> {
    let a = f(&AngularRule::new(n, nodes));
    let b = f(&AngularRule::new(n, 2 * nodes));
    let error = (a - b).abs();
    if error > 1e-8 * b.abs().max(f64::MIN_POSITIVE) && error > 1e-300 {
        return Err(Error::Convergence(format!("angular quadrature unconverged: {a} vs {b}")));
    }
    Ok(Estimate { value: b, error })
}

/// A₁ = κ (−v′) W^{n−1} ∫ k dσ₀.
pub fn coeff_a1(bd: &BoundaryData, n: usize, kappa: f64, cfg: &RepresentationConfig) -> Result<Estimate> {
    let scale = kappa * (-bd.dv) * bd.w.powi(n as i32 - 1);
    let e = converged(n, cfg.nodes, |r| kernel_sphere_integral(r, bd.radius))?;
    Ok(Estimate { value: scale * e.value, error: (scale * e.error).abs() })
}

/// A₂ = −n κ v W^{n−1} ∫ (R − t x)(t − R x)^{−n−1} dσ₀.
pub fn coeff_a2(bd: &BoundaryData, n: usize, kappa: f64, cfg: &RepresentationConfig) -> Result<Estimate> {
    let scale = -(n as f64) * kappa * bd.v * bd.w.powi(n as i32 - 1);
    let e = converged(n, cfg.nodes, |r| kernel_normal_integral(r, bd.radius))?;
    Ok(Estimate { value: scale * e.value, error: (scale * e.error).abs() })
}

/// Volume coefficient with its absolute counterpart and tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeCoefficient {
    pub value: f64,
    /// κ ∫ |source| k dvol.
    pub absolute: f64,
    /// Fitted exponential rate of the radial integrand near the outer end.
    pub tail_rate: f64,
    pub divergent: bool,
}

/// A₀ = κ ∫_{s ≥ s_b} source W^{n−1} ∫ k dσ₀ ds from samples of w − f v on the grid.
pub fn coeff_a0(source: &[f64], g: &WarpedMetric, gauge: &GaugeMap, start: usize, kappa: f64, cfg: &RepresentationConfig) -> Result<VolumeCoefficient> {
    let n = g.n();
    let s = g.s();
    if source.len() != s.len() || start >= s.len() - 2 {
        return Err(Error::InvalidInput("volume source mismatch".into()));
    }
    let rule = AngularRule::new(n, cfg.nodes);
    let xs = &s[start..];
    let dens: Vec<f64> = (start..s.len())
        .map(|i| {
            if source[i] == 0.0 {
                0.0
            } else {
                let r = (s[i] - gauge.sigma).sinh();
                g.w()[i].powi(n as i32 - 1) * kernel_sphere_integral(&rule, r)
            }
        })
        .collect();
    let wts = sample_weights(xs);
    let mut value = 0.0;
    let mut absolute = 0.0;
    for (k, i) in (start..s.len()).enumerate() {
        value += wts[k] * source[i] * dens[k];
        absolute += wts[k] * source[i].abs() * dens[k];
    }
    let s_hi = s[s.len() - 1];
    let (tx, ty): (Vec<f64>, Vec<f64>) = (start..s.len())
        .filter(|&i| s[i] >= s_hi - 6.0 && s[i] <= s_hi - 2.0 && source[i] != 0.0)
        .map(|i| (s[i], (source[i].abs() * dens[i - start]).ln()))
        .unzip();
    let tail_rate = if tx.len() >= 3 { linear_fit(&tx, &ty)?.0 } else { f64::NEG_INFINITY };
    Ok(VolumeCoefficient { value: kappa * value, absolute: kappa * absolute, tail_rate, divergent: tail_rate > -0.05 })
}

/// A_total = A₀ + A₁ + A₂ + A₋₁ with A_total the fitted coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBundle {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a_minus1_residual: f64,
    pub a_total: f64,
}

/// Outcome of the representation cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub bundle: CoefficientBundle,
    pub relative_residual: f64,
    pub ok: bool,
}

pub fn cross_check(a_fit: f64, a0: f64, a1: f64, a2: f64, exact_exterior: bool) -> CrossCheck {
    let residual = a_fit - (a0 + a1 + a2);
    let rel = residual.abs() / a_fit.abs().max(1e-12);
    CrossCheck {
        bundle: CoefficientBundle { a0, a1, a2, a_minus1_residual: residual, a_total: a_fit },
        relative_residual: rel,
        ok: !exact_exterior || rel <= 1e-5,
    }
}

/// Coefficient report with the fields `A0,A1,A2,A_fit,residual,r0,omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct RepresentationReport {
    pub A0: f64,
    pub A1: f64,
    pub A2: f64,
    pub A_fit: f64,
    pub residual: f64,
    pub r0: f64,
    pub omega: Vec<f64>,
    #[serde(skip)]
    pub check: Option<CrossCheck>,
    #[serde(skip)]
    pub volume: Option<VolumeCoefficient>,
}

/// All coefficients for a solved configuration.
pub fn represent(g: &WarpedMetric, res: &SolveResult, f: &[f64], w: &[f64], cfg: &RepresentationConfig, exact_exterior: bool) -> Result<RepresentationReport> {
    let n = g.n();
    if cfg.omega.len() != n || (cfg.omega.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("omega must be a unit vector in R^n".into()));
    }
    let kappa = KernelTable::for_dimension(n)?.kappa();
    let bd = boundary_data(g, res, cfg)?;
    let source: Vec<f64> = (0..w.len()).map(|i| w[i] - f[i] * res.v[i]).collect();
    let a0 = coeff_a0(&source, g, &res.gauge, bd.index, kappa, cfg)?;
    let a1 = coeff_a1(&bd, n, kappa, cfg)?.value;
    let a2 = coeff_a2(&bd, n, kappa, cfg)?.value;
    let check = cross_check(res.a, a0.value, a1, a2, exact_exterior);
    Ok(RepresentationReport {
        A0: a0.value,
        A1: a1,
        A2: a2,
        A_fit: res.a,
        residual: check.bundle.a_minus1_residual,
        r0: bd.radius,
        omega: cfg.omega.clone(),
        check: Some(check),
        volume: Some(a0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::adaptive_gk;
    use std::f64::consts::PI;

    fn oracle(n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let v = adaptive_gk(|phi| f(phi.cos()) * phi.sin().powi(n as i32 - 2), 0.0, PI, 1e-15, 1e-13).value;
        v * sphere_area(n - 1)
    }

    #[test]
    fn kernel_values() {
        let r: f64 = 30.0;
        let on = kernel(&[0.0, 0.0, 1.0], &[0.0, 0.0, r]);
        assert!((on - ((1.0 + r * r).sqrt() - r).powi(-3)).abs() < 1e-9 * on);
        assert!((on / (2.0 * r).powi(3) - 1.0).abs() < 1e-3);
        let anti = kernel(&[0.0, 0.0, 1.0], &[0.0, 0.0, -r]);
        assert!((anti * (2.0 * r).powi(3) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kernel_bound_off_axis() {
        let omega = [1.0, 0.0, 0.0];
        for &r in &[2.0f64, 10.0, 100.0] {
            for k in 1..50 {
                let phi = k as f64 * PI / 50.0;
                let y = [r * phi.cos(), r * phi.sin(), 0.0];
                let k = kernel(&omega, &y);
                assert!(k > 0.0);
                assert!(k <= ((1.0 - phi.cos()) * r).powi(-3) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn angular_integrals_match_oracle() {
        for n in 3..=6 {
            let rule = AngularRule::new(n, 24);
            for &r in &[0.5f64, 2f64.sinh(), 20.0, 300.0] {
                let t = (1.0 + r * r).sqrt();
                let a = kernel_sphere_integral(&rule, r);
                let b = oracle(n, |x| (t - r * x).powi(-(n as i32)));
                assert!((a / b - 1.0).abs() < 1e-10, "n={n} r={r}: {a} {b}");
                let a = kernel_normal_integral(&rule, r);
                let b = oracle(n, |x| (r - t * x) * (t - r * x).powi(-(n as i32) - 1));
                assert!((a / b - 1.0).abs() < 1e-8, "n={n} r={r}: {a} {b}");
            }
        }
    }

    #[test]
    fn n3_closed_forms() {
        let rule = AngularRule::new(3, 24);
        for &r in &[0.3f64, 3.0, 40.0] {
            let t = (1.0 + r * r).sqrt();
            assert!((kernel_sphere_integral(&rule, r) / (4.0 * PI * t) - 1.0).abs() < 1e-12);
            assert!((kernel_normal_integral(&rule, r) / (-4.0 * PI * r / 3.0) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_integral_grows_linearly() {
        for n in 3..=5 {
            let rule = AngularRule::new(n, 24);
            let q: Vec<f64> = [100.0, 1000.0, 10000.0].iter().map(|&r| kernel_sphere_integral(&rule, r) / r).collect();
            assert!((q[2] / q[1] - 1.0).abs() < 1e-3);
            assert!((q[1] / q[0] - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn direction_independence() {
        let r = 2f64.sinh();
        let rule = AngularRule::new(3, 24);
        let reference = kernel_sphere_integral(&rule, r);
        for omega in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.48, 0.6, 0.64]] {
            let d = kernel_sphere_integral_direct(&omega, r, 256);
            assert!((d / reference - 1.0).abs() < 1e-6, "{omega:?}: {d} {reference}");
        }
        let omega4 = [0.5, 0.5, 0.5, 0.5];
        let d = kernel_sphere_integral_direct(&omega4, 1.5, 64);
        let reference = kernel_sphere_integral(&AngularRule::new(4, 24), 1.5);
        assert!((d / reference - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cross_check_bookkeeping() {
        let c = cross_check(1.0, 0.25, 0.5, 0.25 - 1e-7, true);
        assert!(c.ok);
        let b = c.bundle;
        assert!((b.a0 + b.a1 + b.a2 + b.a_minus1_residual - b.a_total).abs() < 1e-15);
        assert!(!cross_check(1.0, 0.0, 0.5, 0.4, true).ok);
        assert!(cross_check(1.0, 0.0, 0.5, 0.4, false).ok);
    }
}
