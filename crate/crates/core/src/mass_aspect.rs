//! Geodesic defining functions and the mass aspect of rotationally symmetric
//! asymptotically hyperbolic metrics.
//!
//! For g = ds² + W(s)² g₀ the geodesic defining function solves dρ/ds = −sinh ρ, so
//! sinh ρ = 1/sinh(s − σ) for a constant σ. Roundness of conformal infinity pins
//! σ = lim (s − asinh W(s)). Then g = sinh^{−2}ρ (dρ² + sinh²ρ W² g₀) and the mass aspect is
//! h = lim n (sinh²ρ W² − 1)/ρⁿ · g₀.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fd::{central6, derivative};
use crate::numerics::fit::{lstsq, polyfit};
use crate::numerics::quadrature::cumulative_hermite;
use crate::numerics::special::{ln_sinh, sphere_area};
use crate::warped_geometry::WarpedMetric;

/// Window in ρ used for expansion fits.
pub const FIT_WINDOW: (f64, f64) = (0.01, 0.2);
const FIT_DEGREE: usize = 4;
const SIGMA_TOL: f64 = 1e-6;

/// Geodesic defining function on a metric's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMap {
    pub n: usize,
    pub s: Vec<f64>,
    pub rho: Vec<f64>,
    /// r = (cosh ρ − 1)/sinh ρ = tanh(ρ/2)
    pub r: Vec<f64>,
    pub sigma: f64,
    /// Largest |dρ/ds + sinh ρ| over the grid.
    pub gauge_residual: f64,
    /// |σ(s_hi) − σ(s_hi − 2)|.
    pub roundness_defect: f64,
}

impl GaugeMap {
    /// ρ at an arbitrary s.
    pub fn rho_at(&self, s: f64) -> f64 {
        rho_of(s - self.sigma)
    }

    /// Grid indices with ρ inside `window`.
    pub fn window_indices(&self, window: (f64, f64)) -> Vec<usize> {
        (0..self.rho.len()).filter(|&i| self.rho[i] >= window.0 && self.rho[i] <= window.1).collect()
    }
}

fn rho_of(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * (-x).exp().atanh()
}

fn sigma_at(g: &WarpedMetric, i: usize) -> f64 {
    g.s()[i] - g.w()[i].asinh()
}

/// Geodesic gauge calibrated at the outermost grid point.
pub fn geodesic_gauge(g: &WarpedMetric) -> Result<GaugeMap> {
    let last = g.s().len() - 1;
    geodesic_gauge_at(g, g.s()[last])
}

/// Geodesic gauge calibrated at the grid point nearest `s_cal`.
pub fn geodesic_gauge_at(g: &WarpedMetric, s_cal: f64) -> Result<GaugeMap> {
    let s = g.s();
    let last = s.len() - 1;
    if s[last] - s[0] < 4.0 {
        return Err(Error::InvalidInput("grid too short for a gauge calibration".into()));
    }
    let ical = g.grid().nearest(s_cal);
    let iref = g.grid().nearest(s[last] - 2.0);
    let sigma = sigma_at(g, ical);
    let defect = (sigma_at(g, last) - sigma_at(g, iref)).abs();
    if !(defect <= SIGMA_TOL) || !sigma.is_finite() {
        return Err(Error::Hypothesis(format!(
            "not asymptotically hyperbolic: s − asinh W drifts by {defect:e} over the last two units"
        )));
    }
    let rho: Vec<f64> = s.iter().map(|&x| rho_of(x - sigma)).collect();
    let r: Vec<f64> = s.iter().map(|&x| if x > sigma { (sigma - x).exp() } else { 1.0 }).collect();
    let mut gauge_residual = 0.0f64;
    for &x in s {
        let t = x - sigma;
        if t > 0.1 {
            let d = central6(rho_of, t, 1e-3 * t.min(1.0));
            let res = (d + 1.0 / t.sinh()).abs();
            gauge_residual = gauge_residual.max(res);
        }
    }
    Ok(GaugeMap { n: g.n(), s: s.to_vec(), rho, r, sigma, gauge_residual, roundness_defect: defect })
}

/// The mass aspect h = h_scalar g₀ and its integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassAspect {
    pub n: usize,
    pub h_scalar: f64,
    /// ∫ Tr_{g₀} h dvol₀
    pub trace_integral: f64,
    /// ∫ x Tr_{g₀} h dvol₀
    pub moment: Vec<f64>,
    /// RMS residual of the expansion fit.
    pub fit_rms: f64,
    /// Change of the leading coefficient when the fit degree is raised by one.
    pub fit_spread: f64,
}

impl MassAspect {
    pub fn from_scalar(n: usize, h_scalar: f64) -> Self {
        MassAspect {
            n,
            h_scalar,
            trace_integral: (n as f64 - 1.0) * h_scalar * sphere_area(n),
            moment: vec![0.0; n],
            fit_rms: 0.0,
            fit_spread: 0.0,
        }
    }

    /// The fit is trustworthy.
    pub fn stable(&self) -> bool {
        self.fit_spread <= 1e-6 * self.h_scalar.abs().max(1e-3)
    }
}

/// Fit ln W − ln sinh(s − σ) = −δσ cosh ρ + ½ ln(1 + h ρⁿ/n + …) over the fit window.
/// The δσ column absorbs the residual calibration error of σ, which would otherwise
/// enter h amplified by ρ^{−n}.
pub fn extract_mass_aspect(gauge: &GaugeMap, g: &WarpedMetric) -> Result<MassAspect> {
    let n = g.n();
    let nf = n as f64;
    let idx = gauge.window_indices(FIT_WINDOW);
    if idx.len() < 2 * FIT_DEGREE + 4 {
        return Err(Error::InvalidInput(format!("only {} grid points in the mass-aspect window", idx.len())));
    }
    let x: Vec<f64> = idx.iter().map(|&i| gauge.rho[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| g.w()[i].ln() - ln_sinh(g.s()[i] - gauge.sigma)).collect();
    let fit_with = |degree: usize| {
        let mut cols = vec![x.iter().map(|p| p.cosh()).collect::<Vec<f64>>()];
        for k in 0..=degree {
            cols.push(x.iter().map(|p| p.powi((n + k) as i32)).collect());
        }
        lstsq(&cols, &y)
    };
    let fit = fit_with(FIT_DEGREE)?;
    let alt = fit_with(FIT_DEGREE + 1)?;
    let mut out = MassAspect::from_scalar(n, 2.0 * nf * fit.coeffs[1]);
    out.fit_rms = fit.rms;
    out.fit_spread = 2.0 * nf * (fit.coeffs[1] - alt.coeffs[1]).abs();
    Ok(out)
}

/// Mass aspect after the conformal change (1 + v)^{4/(n−2)} with v = A ρⁿ + …:
/// h̃ = h + 4(n+1)A/(n−2).
pub fn gauge_shift_law(a: f64, h: &MassAspect, n: usize) -> MassAspect {
    let nf = n as f64;
    let mut out = MassAspect::from_scalar(n, h.h_scalar + 4.0 * (nf + 1.0) * a / (nf - 2.0));
    out.fit_rms = h.fit_rms;
    out.fit_spread = h.fit_spread;
    out
}

/// (∫ Tr h, |∫ x Tr h|, lhs ≥ rhs).
pub fn wang_inequality(h: &MassAspect) -> (f64, f64, bool) {
    let lhs = h.trace_integral;
    let rhs = h.moment.iter().map(|m| m * m).sum::<f64>().sqrt();
    (lhs, rhs, lhs >= rhs - 1e-9)
}

/// Outcome of the radial gauge-change check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WExpansion {
    pub coefficient: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub ok: bool,
}

/// Solve 2 ∂w/∂r + r (∂w/∂r)² = ((1+v)^{4/(n−2)} − 1)/r outward-in from w(0) = 0 and
/// compare the ρⁿ coefficient of w with 2A/(n(n−2)).
pub fn w_expansion_check(g: &WarpedMetric, gauge: &GaugeMap, v: &[f64], a: f64) -> Result<WExpansion> {
    let n = g.n();
    let nf = n as f64;
    let p = 4.0 / (nf - 2.0);
    let s = g.s();
    let m = s.len();
    if v.len() != m {
        return Err(Error::InvalidInput("v length mismatch".into()));
    }
    // with dr/ds = −r the integrand r ∂w/∂r is E/(1 + √(1+E)), E = (1+v)^p − 1
    let integrand: Vec<f64> = v
        .iter()
        .map(|&x| {
            let e = (p * x.ln_1p()).exp_m1();
            e / (1.0 + (1.0 + e).sqrt())
        })
        .collect();
    let rev_s: Vec<f64> = s.iter().rev().map(|x| -x).collect();
    let rev_y: Vec<f64> = integrand.iter().rev().copied().collect();
    let rev_dy: Vec<f64> = derivative(&rev_s, &rev_y, 1, 5);
    let cum = cumulative_hermite(&rev_s, &rev_y, &rev_dy);
    let tail = integrand[m - 1] / nf;
    let idx = gauge.window_indices(FIT_WINDOW);
    if idx.len() < 8 {
        return Err(Error::InvalidInput("too few points in the w-expansion window".into()));
    }
    let x: Vec<f64> = idx.iter().map(|&i| gauge.rho[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| (cum[m - 1 - i] + tail) / gauge.rho[i].powi(n as i32)).collect();
    let fit = polyfit(&x, &y, 3)?;
    let coefficient = fit.coeffs[0];
    let expected = 2.0 * a / (nf * (nf - 2.0));
    let rel_error = if expected == 0.0 {
        coefficient.abs()
    } else {
        ((coefficient - expected) / expected).abs()
    };
    Ok(WExpansion { coefficient, expected, rel_error, ok: rel_error <= 0.02 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grid::Grid;
    use crate::warped_geometry::{make_ads_schwarzschild, make_hyperbolic, CylinderProfile};
    use std::sync::Arc;

    #[test]
    fn hyperbolic_gauge_exact() {
        let g = make_hyperbolic(3, 20.0, 4000).unwrap();
        let gm = geodesic_gauge(&g).unwrap();
        assert!(gm.sigma.abs() < 1e-12);
        assert!(gm.gauge_residual < 1e-10);
        for (i, &s) in g.s().iter().enumerate().skip(1) {
            assert!((gm.rho[i].sinh() * s.sinh() - 1.0).abs() < 1e-9);
        }
        let h = extract_mass_aspect(&gm, &g).unwrap();
        assert!(h.h_scalar.abs() < 1e-8);
        let (l, r, ok) = wang_inequality(&h);
        assert!(l.abs() < 1e-7 && r == 0.0 && ok);
    }

    #[test]
    fn ads_mass_aspect_is_two_m() {
        for &m in &[0.05, 0.1, 0.2, 0.4] {
            let g = make_ads_schwarzschild(3, m, 1.0, 1f64.asinh(), 20.0, 4000).unwrap();
            let gm = geodesic_gauge(&g).unwrap();
            let h = extract_mass_aspect(&gm, &g).unwrap();
            assert!((h.h_scalar / (2.0 * m) - 1.0).abs() < 1e-6, "m = {m}: {}", h.h_scalar);
            assert!(h.stable());
            assert!((h.trace_integral - 2.0 * h.h_scalar * 4.0 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn ads_linear_in_mass_n4() {
        let base = {
            let g = make_ads_schwarzschild(4, 0.1, 1.0, 1.0, 18.0, 4000).unwrap();
            extract_mass_aspect(&geodesic_gauge(&g).unwrap(), &g).unwrap().h_scalar
        };
        for &m in &[0.05, 0.2, 0.4] {
            let g = make_ads_schwarzschild(4, m, 1.0, 1.0, 18.0, 4000).unwrap();
            let h = extract_mass_aspect(&geodesic_gauge(&g).unwrap(), &g).unwrap().h_scalar;
            assert!((h / (base * m / 0.1) - 1.0).abs() < 1e-6, "{m} {h} {base}");
        }
    }

    #[test]
    fn calibration_point_irrelevant() {
        let g = make_ads_schwarzschild(3, 0.1, 1.0, 1f64.asinh(), 20.0, 4000).unwrap();
        let a = extract_mass_aspect(&geodesic_gauge(&g).unwrap(), &g).unwrap();
        let b = extract_mass_aspect(&geodesic_gauge_at(&g, 17.0).unwrap(), &g).unwrap();
        assert!((a.h_scalar - b.h_scalar).abs() < 1e-8);
    }

    #[test]
    fn cylinder_rejected() {
        let p = CylinderProfile { n: 3, c: 1.0, s_lo: 0.0, s_hi: 20.0 };
        let g = WarpedMetric::from_profile(Arc::new(p), Grid::uniform(0.0, 20.0, 200).unwrap()).unwrap();
        assert!(matches!(geodesic_gauge(&g), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn shift_law_bookkeeping() {
        let h = MassAspect::from_scalar(3, 0.2);
        assert_eq!(gauge_shift_law(0.0, &h, 3).h_scalar, 0.2);
        assert_eq!(gauge_shift_law(1.0, &h, 3).h_scalar - 0.2, 16.0);
        let neg = MassAspect::from_scalar(3, -0.1);
        assert!(!wang_inequality(&neg).2);
    }

    #[test]
    fn w_expansion_synthetic() {
        let g = make_hyperbolic(3, 20.0, 4000).unwrap();
        let gm = geodesic_gauge(&g).unwrap();
        let zero = vec![0.0; g.s().len()];
        let r = w_expansion_check(&g, &gm, &zero, 0.0).unwrap();
        assert_eq!(r.coefficient, 0.0);
        for &a in &[0.5, -0.2] {
            let v: Vec<f64> = gm.rho.iter().map(|&p| if p.is_finite() { a * p.powi(3) } else { 0.0 }).collect();
            let r = w_expansion_check(&g, &gm, &v, a).unwrap();
            assert!(r.rel_error < 1e-3, "{r:?}");
        }
    }
}
