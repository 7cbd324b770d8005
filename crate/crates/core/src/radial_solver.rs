//! Radial solver for −Δ_g v + n v + f v = w on rotationally symmetric metrics.
//!
//! The operator is discretised in conservative form
//! −W^{1−n}(W^{n−1} v′)′ + (n + f) v = w on vertex-centred control volumes, which gives an
//! M-matrix whenever n + f > 0. The centre carries the regularity condition v′(0) = 0
//! through its half cell; the outer boundary uses the decaying-mode Robin condition
//! v′/v = G₀′/G₀ evaluated at s − σ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green_kernel::{log_derivative, KernelTable, DEFAULT_I_MAX, DEFAULT_TOL};
use crate::mass_aspect::{geodesic_gauge, GaugeMap};
use crate::numerics::fd::derivative;
use crate::numerics::fit::linear_fit;
use crate::numerics::linalg::solve_tridiagonal;
use crate::numerics::quadrature::{apply_rule, gauss_legendre, sample_weights};
use crate::numerics::special::sphere_area;
use crate::warped_geometry::{conformal_reparametrize, ConformalFactor, WarpedMetric};

const UNDERFLOW: f64 = 1e-280;

/// Decay rates of f, w and the target weight for v.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    pub kappa: f64,
    pub eta: f64,
    pub delta: f64,
}

/// Data for one solve.
#[derive(Debug, Clone, Copy)]
pub struct SolverInput<'a> {
    pub g: &'a WarpedMetric,
    pub f: &'a [f64],
    pub w: &'a [f64],
    pub decay: Option<DecaySpec>,
    /// Relative residual tolerance of the discrete system.
    pub tol: f64,
    /// Truncation tolerance of the kernel series behind the outer boundary condition.
    pub series_tol: f64,
    /// Decay-fit window in s; defaults to [s_hi − 6, s_hi − 2].
    pub fit_window: Option<(f64, f64)>,
}

impl<'a> SolverInput<'a> {
    pub fn new(g: &'a WarpedMetric, f: &'a [f64], w: &'a [f64]) -> Self {
        SolverInput { g, f, w, decay: None, tol: 1e-9, series_tol: DEFAULT_TOL, fit_window: None }
    }
}

/// Fitted decay v ≈ A ρ^order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub fit_order: f64,
    /// A from the window shifted inward by one unit.
    pub a_shifted: f64,
    pub window: (f64, f64),
    /// |fit_order − n| ≤ 2% of n.
    pub compliant: bool,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub ddv: Vec<f64>,
    /// Row-wise relative residual of the discrete system.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub gauge: GaugeMap,
    pub decay: DecayFit,
    pub a: f64,
    pub fit_order: f64,
    pub positive: bool,
    /// Discrete C²_δ norm of v on s ≥ σ + 1.
    pub weighted_norm_delta: f64,
    /// n + f > 0 at every node.
    pub m_matrix: bool,
    /// ∫ |f⁻|^{n/2} dvol.
    pub f_norm: f64,
    /// Measured decay exponents of f and w in the fit window.
    pub f_rate: f64,
    pub w_rate: f64,
    /// f decays faster than ρ² and w faster than ρ^{n+1}.
    pub sources_compliant: bool,
}

/// Solve the radial equation.
pub fn solve(input: &SolverInput) -> Result<SolveResult> {
    let g = input.g;
    let n = g.n();
    let nf = n as f64;
    let s = g.s();
    let m = s.len();
    if input.f.len() != m || input.w.len() != m {
        return Err(Error::InvalidInput("f, w must be sampled on the metric grid".into()));
    }
    if !g.center_regular() || s[0] != 0.0 {
        return Err(Error::InvalidInput("solver needs a center-regular metric starting at s = 0".into()));
    }
    if input.f.iter().chain(input.w).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite source data".into()));
    }
    let gauge = geodesic_gauge(g)?;
    let table = KernelTable::new(n, input.series_tol, DEFAULT_I_MAX)?;
    let lambda = log_derivative(&table, s[m - 1] - gauge.sigma)?;

    let pw = |x: f64| x.powi(n as i32 - 1);
    let face: Vec<f64> = (0..m - 1)
        .map(|i| pw(g.eval(0.5 * (s[i] + s[i + 1])).w) / (s[i + 1] - s[i]))
        .collect();
    let (gx, gwt) = gauss_legendre(6);
    let vol: Vec<f64> = (0..m)
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { 0.5 * (s[i - 1] + s[i]) };
            let hi = if i == m - 1 { s[i] } else { 0.5 * (s[i] + s[i + 1]) };
            apply_rule(|x| pw(g.eval(x).w), lo, s[i], &gx, &gwt) + apply_rule(|x| pw(g.eval(x).w), s[i], hi, &gx, &gwt)
        })
        .collect();
    let mut sub = vec![0.0; m];
    let mut sup = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        diag[i] = vol[i] * (nf + input.f[i]);
        rhs[i] = vol[i] * input.w[i];
        if i > 0 {
            sub[i] = -face[i - 1];
            diag[i] += face[i - 1];
        }
        if i + 1 < m {
            sup[i] = -face[i];
            diag[i] += face[i];
        }
    }
    diag[m - 1] -= pw(g.w()[m - 1]) * lambda;
    let v = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;

    let residual: Vec<f64> = (0..m)
        .map(|i| {
            let mut acc = diag[i] * v[i] - rhs[i];
            let mut scale = (diag[i] * v[i]).abs() + rhs[i].abs();
            if i > 0 {
                acc += sub[i] * v[i - 1];
                scale += (sub[i] * v[i - 1]).abs();
            }
            if i + 1 < m {
                acc += sup[i] * v[i + 1];
                scale += (sup[i] * v[i + 1]).abs();
            }
            if scale > 0.0 {
                acc.abs() / scale
            } else {
                0.0
            }
        })
        .collect();
    let residual_norm = residual.iter().fold(0.0f64, |a, &b| a.max(b));
    if !(residual_norm <= input.tol) {
        return Err(Error::Numerical(format!("discrete residual {residual_norm:e} above {:e}", input.tol)));
    }

    let dv = derivative(s, &v, 1, 5);
    let ddv: Vec<f64> = (0..m)
        .map(|i| {
            let src = (nf + input.f[i]) * v[i] - input.w[i];
            if i == 0 {
                src / nf
            } else {
                src - (nf - 1.0) * g.dw()[i] / g.w()[i] * dv[i]
            }
        })
        .collect();
    let window = input.fit_window.unwrap_or_else(|| default_window(s[m - 1]));
    let decay = extract_decay(&v, &gauge, window)?;
    let f_rate = source_rate(input.f, &gauge, window)?;
    let w_rate = source_rate(input.w, &gauge, window)?;
    let delta = input.decay.map(|d| d.delta).unwrap_or(nf - 0.1);
    let weighted_norm_delta = weighted_norm(&v, g, &gauge, delta, 2, Some((gauge.sigma + 1.0, s[m - 1])));
    let f_norm = {
        let p = nf / 2.0;
        let dens = g.area_density();
        let wts = sample_weights(s);
        sphere_area(n) * (0..m).map(|i| wts[i] * input.f[i].min(0.0).abs().powf(p) * dens[i]).sum::<f64>()
    };
    let mut out = SolveResult {
        s: s.to_vec(),
        v,
        dv,
        ddv,
        residual,
        residual_norm,
        a: decay.a,
        fit_order: decay.fit_order,
        decay,
        gauge,
        positive: false,
        weighted_norm_delta,
        m_matrix: input.f.iter().all(|&x| nf + x > 0.0),
        f_norm,
        f_rate,
        w_rate,
        sources_compliant: f_rate > 2.0 && w_rate > nf + 1.0,
    };
    out.positive = check_positivity(&out);
    Ok(out)
}

impl SolveResult {
    pub fn a_shifted(&self) -> f64 {
        self.decay.a_shifted
    }
}

/// Default decay-fit window [s_hi − 6, s_hi − 2].
pub fn default_window(s_hi: f64) -> (f64, f64) {
    (s_hi - 6.0, s_hi - 2.0)
}

fn fit_window(v: &[f64], gauge: &GaugeMap, window: (f64, f64)) -> Result<Option<(f64, f64)>> {
    let n = gauge.n as f64;
    let idx: Vec<usize> = (0..v.len()).filter(|&i| gauge.s[i] >= window.0 && gauge.s[i] <= window.1).collect();
    if idx.len() < 3 {
        return Err(Error::InvalidInput(format!("decay window {window:?} holds {} points", idx.len())));
    }
    if idx.iter().all(|&i| v[i] == 0.0) {
        return Ok(None);
    }
    let sign = v[idx[0]].signum();
    for &i in &idx {
        if v[i].abs() < UNDERFLOW {
            return Err(Error::Numerical(format!("solution underflows in the decay window at s = {}", gauge.s[i])));
        }
        if v[i].signum() != sign {
            return Err(Error::Numerical("solution changes sign in the decay window".into()));
        }
    }
    let x: Vec<f64> = idx.iter().map(|&i| gauge.rho[i].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| v[i].abs().ln()).collect();
    let (order, _) = linear_fit(&x, &y)?;
    let mean = x.iter().zip(&y).map(|(a, b)| b - n * a).sum::<f64>() / x.len() as f64;
    Ok(Some((sign * mean.exp(), order)))
}

/// Fit v ≈ A ρⁿ with ρ the geodesic defining function; the free-slope exponent is reported
/// alongside.
pub fn extract_decay(v: &[f64], gauge: &GaugeMap, window: (f64, f64)) -> Result<DecayFit> {
    let n = gauge.n as f64;
    match fit_window(v, gauge, window)? {
        None => Ok(DecayFit { a: 0.0, fit_order: f64::NAN, a_shifted: 0.0, window, compliant: false }),
        Some((a, order)) => {
            let shifted = fit_window(v, gauge, (window.0 - 1.0, window.1 - 1.0))?.map(|p| p.0).unwrap_or(0.0);
            Ok(DecayFit { a, fit_order: order, a_shifted: shifted, window, compliant: (order - n).abs() <= 0.02 * n })
        }
    }
}

/// Log–log slope of |u| against ρ over the nonzero samples of an s-window; infinite when u
/// vanishes there.
pub fn source_rate(u: &[f64], gauge: &GaugeMap, window: (f64, f64)) -> Result<f64> {
    let idx: Vec<usize> = (0..u.len())
        .filter(|&i| gauge.s[i] >= window.0 && gauge.s[i] <= window.1 && u[i].abs() > UNDERFLOW)
        .collect();
    if idx.len() < 3 {
        return Ok(f64::INFINITY);
    }
    let x: Vec<f64> = idx.iter().map(|&i| gauge.rho[i].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| u[i].abs().ln()).collect();
    Ok(linear_fit(&x, &y)?.0)
}

/// Discrete C^k_δ norm: sup of ρ̄^{−δ} Σ_{j≤k} |∂_s^j u| with ρ̄ = min(ρ, 1), optionally
/// restricted to an s-window.
pub fn weighted_norm(u: &[f64], g: &WarpedMetric, gauge: &GaugeMap, delta: f64, k: usize, window: Option<(f64, f64)>) -> f64 {
    let s = g.s();
    let d1 = if k >= 1 { derivative(s, u, 1, 5) } else { Vec::new() };
    let d2 = if k >= 2 { derivative(s, u, 2, 6) } else { Vec::new() };
    let mut best = 0.0f64;
    for i in 0..s.len() {
        if let Some((a, b)) = window {
            if s[i] < a || s[i] > b {
                continue;
            }
        }
        let mut val = u[i].abs();
        if k >= 1 {
            val += d1[i].abs();
        }
        if k >= 2 {
            val += d2[i].abs();
        }
        let rb = gauge.rho[i].min(1.0);
        best = best.max(val / rb.powf(delta));
    }
    best
}

/// v > 0 everywhere and v → 0 at the outer end.
pub fn check_positivity(res: &SolveResult) -> bool {
    let vmax = res.v.iter().fold(0.0f64, |a, &b| a.max(b));
    vmax > 0.0 && res.v.iter().all(|&x| x > 0.0) && res.v[res.v.len() - 1] < 1e-6 * vmax
}

/// (1+v)^{4/(n−2)} − [1 + 4/(n−2) − 4/((n−2)(1+v))].
pub fn deformation_gap(v: f64, n: usize) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::InvalidInput(format!("deformation gap needs v ≥ 0, got {v}")));
    }
    let p = 4.0 / (n as f64 - 2.0);
    Ok((p * v.ln_1p()).exp_m1() - p * v / (1.0 + v))
}

/// Scalar-curvature check of (1 + v)^{4/(n−2)} g.
#[derive(Debug, Clone)]
pub struct DeformationReport {
    /// min (R̂ + n(n−1)).
    pub min_margin: f64,
    /// s at which the minimum occurs.
    pub location: f64,
    pub ok: bool,
    pub metric: WarpedMetric,
}

/// Tolerance of [`certify_deformation`].
pub const DEFORMATION_TOL: f64 = 1e-6;

pub fn certify_deformation(g: &WarpedMetric, res: &SolveResult) -> Result<DeformationReport> {
    let factor = ConformalFactor {
        u: res.v.iter().map(|x| 1.0 + x).collect(),
        du: res.dv.clone(),
        ddu: res.ddv.clone(),
    };
    let metric = conformal_reparametrize(g, &factor)?;
    let (mut min_margin, mut location) = (f64::INFINITY, f64::NAN);
    for (i, &e) in metric.excess().iter().enumerate() {
        if e < min_margin {
            min_margin = e;
            location = g.s()[i];
        }
    }
    Ok(DeformationReport { min_margin, location, ok: min_margin >= -DEFORMATION_TOL, metric })
}

/// Rows `s,v,residual,rho`.
pub fn dump_rows(res: &SolveResult) -> Vec<[f64; 4]> {
    (0..res.s.len()).map(|i| [res.s[i], res.v[i], res.residual[i], res.gauge.rho[i]]).collect()
}
