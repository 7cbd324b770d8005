//! Fundamental solution of −Δ + n on hyperbolic space H^n.
//!
//! With r = sinh s and t = cosh s the kernel is
//! G₀(s) = c_n θ̃(t) / (θ̃(1) r^{n−2} t²), where
//! θ̃(t) = Σ_k a_k t^{−2k}, a₀ = 1, a_{k+1} = a_k (k + 3/2)/(k + (n+3)/2),
//! and c_n = 1/((n−2) vol(S^{n−1})).
//!
//! The coefficients satisfy the telescoping identity
//! Σ_{k≥N} a_k = a_N (2N + n + 1)/(n − 2), so θ̃(1) = (n+1)/(n−2) and every truncated sum
//! carries a rigorous tail bound. Large distances are evaluated in the log domain.

use crate::error::{Error, Result};
use crate::hyperboloid_core::{distance, HyperboloidPoint};
use crate::numerics::fd::central6;
use crate::numerics::special::{coth, ln_cosh, ln_sinh, sphere_area};

/// Default relative tolerance of the θ̃ series.
pub const DEFAULT_TOL: f64 = 1e-14;
/// Default cap on the number of series terms.
pub const DEFAULT_I_MAX: usize = 400_000_000;

/// Precomputed kernel constants for one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    n: usize,
    theta0: f64,
    c_n: f64,
    tol: f64,
    i_max: usize,
    tail_bound: f64,
}

/// A truncated series value with its tail bound and term count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// One row of the kernel dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub s: f64,
    pub g: f64,
    pub gprime: f64,
    pub residual: f64,
    pub flux: f64,
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("dimension {n} < 3")));
    }
    Ok(())
}

/// Σ a_k z^k for z = t^{−2}, summed until the tail bound drops below `tol` (absolute; θ̃ ≥ 1).
pub fn theta_tilde_series(n: usize, t: f64, tol: f64, i_max: usize) -> Result<SeriesValue> {
    check_dim(n)?;
    if !(t >= 1.0) {
        return Err(Error::InvalidInput(format!("theta_tilde: t = {t} < 1")));
    }
    let z = 1.0 / (t * t);
    let nf = n as f64;
    let tail_at_one = |k: usize, a: f64| a * (2.0 * k as f64 + nf + 1.0) / (nf - 2.0);
    let mut a = 1.0;
    let mut zk = 1.0;
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        // tail from index k onward
        let bound = if z == 1.0 {
            // exact: add it and stop
            sum += tail_at_one(k, a);
            return Ok(SeriesValue { value: sum, tail_bound: 0.0, terms: k });
        } else {
            let geometric = a * zk / (1.0 - z);
            (zk * tail_at_one(k, a)).min(geometric)
        };
        if bound <= tol {
            return Ok(SeriesValue { value: sum, tail_bound: bound, terms: k });
        }
        if k >= i_max {
            return Err(Error::Convergence(format!(
                "theta_tilde: tail bound {bound:e} above {tol:e} after {k} terms (t = {t})"
            )));
        }
        sum += a * zk;
        let kf = k as f64;
        a *= (kf + 1.5) / (kf + 0.5 * (nf + 3.0));
        zk *= z;
        k += 1;
    }
}

/// θ̃(t) to absolute accuracy `tol`.
pub fn theta_tilde(n: usize, t: f64, tol: f64) -> Result<f64> {
    Ok(theta_tilde_series(n, t, tol, DEFAULT_I_MAX)?.value)
}

/// dS/dz = Σ k a_k z^{k−1} for z < 1, to relative accuracy `tol`.
fn theta_series_dz(n: usize, z: f64, tol: f64, i_max: usize) -> Result<f64> {
    let nf = n as f64;
    let mut a = 1.0;
    let mut zk1 = 1.0; // z^{k−1} for k ≥ 1
    let mut sum = 0.0;
    // a₁
    a *= 1.5 / (0.5 * (nf + 3.0));
    let mut k = 1usize;
    loop {
        let term = k as f64 * a * zk1;
        if k >= 3 {
            let bound = term / (1.0 - z);
            if bound <= tol * sum {
                return Ok(sum);
            }
        }
        if k >= i_max {
            return Err(Error::Convergence(format!("theta derivative series: no convergence at z = {z}")));
        }
        sum += term;
        let kf = k as f64;
        a *= (kf + 1.5) / (kf + 0.5 * (nf + 3.0));
        zk1 *= z;
        k += 1;
    }
}

impl KernelTable {
    /// Build the table for dimension `n`.
    pub fn new(n: usize, tol: f64, i_max: usize) -> Result<Self> {
        check_dim(n)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("series tolerance {tol}")));
        }
        let sv = theta_tilde_series(n, 1.0, tol, i_max)?;
        let c_n = 1.0 / ((n as f64 - 2.0) * sphere_area(n));
        Ok(KernelTable { n, theta0: sv.value, c_n, tol, i_max, tail_bound: sv.tail_bound })
    }

    /// Table with the default tolerance.
    pub fn for_dimension(n: usize) -> Result<Self> {
        Self::new(n, DEFAULT_TOL, DEFAULT_I_MAX)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// θ̃(1).
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// κ_n = c_n/θ̃(1): the limit of G₀ sinh^n s, of −cosh^n(s) G₀′(s)/n, and the constant
    /// in the limiting direction kernel κ_n (t_y − ω·y)^{−n}.
    pub fn kappa(&self) -> f64 {
        self.c_n / self.theta0
    }

    fn theta_parts(&self, s: f64) -> Result<(f64, f64)> {
        if !(s > 0.0) {
            return Err(Error::InvalidInput(format!("kernel evaluated at s = {s} ≤ 0")));
        }
        let t = s.cosh();
        let theta = theta_tilde_series(self.n, t, self.tol, self.i_max)?.value;
        let z = 1.0 / (t * t);
        // dθ̃/ds = S′(z) dz/dt sinh s = −2 S′(z) sinh s / t³
        let dtheta_ds = if z < 1e-300 {
            0.0
        } else {
            -2.0 * theta_series_dz(self.n, z, self.tol, self.i_max)? * s.sinh() / (t * t * t)
        };
        Ok((theta, dtheta_ds))
    }

    fn log_g(&self, s: f64, theta: f64) -> f64 {
        (self.c_n / self.theta0).ln() + theta.ln() - (self.n as f64 - 2.0) * ln_sinh(s) - 2.0 * ln_cosh(s)
    }
}

/// G₀(s).
pub fn green0(table: &KernelTable, s: f64) -> Result<f64> {
    let (theta, _) = table.theta_parts(s)?;
    Ok(table.log_g(s, theta).exp())
}

/// G₀′(s)/G₀(s).
pub fn log_derivative(table: &KernelTable, s: f64) -> Result<f64> {
    let (theta, dtheta) = table.theta_parts(s)?;
    Ok(dtheta / theta - (table.n as f64 - 2.0) * coth(s) - 2.0 * s.tanh())
}

/// G₀′(s).
pub fn green_prime(table: &KernelTable, s: f64) -> Result<f64> {
    let (theta, dtheta) = table.theta_parts(s)?;
    let l = dtheta / theta - (table.n as f64 - 2.0) * coth(s) - 2.0 * s.tanh();
    Ok(table.log_g(s, theta).exp() * l)
}

/// G_H(x, y) = G₀(d_H(x, y)).
pub fn green_at(table: &KernelTable, x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    let d = distance(x, y)?;
    if d == 0.0 {
        return Err(Error::InvalidInput("green_at: coincident points".into()));
    }
    green0(table, d)
}

/// Radial residual −G″ − (n−1) coth(s) G′ + nG, with G″ from sixth-order differences of
/// the analytic G′.
pub fn ode_residual(table: &KernelTable, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("ode_residual at s = {s}")));
    }
    let h = (0.005 * s).min(0.01);
    let mut failure = None;
    let gpp = central6(
        |x| match green_prime(table, x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        s,
        h,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let g = green0(table, s)?;
    let gp = green_prime(table, s)?;
    Ok(-gpp - (table.n as f64 - 1.0) * coth(s) * gp + table.n as f64 * g)
}

/// Flux −vol(S^{n−1}) sinh^{n−1}(s) G₀′(s) through the geodesic sphere of radius s.
pub fn flux(table: &KernelTable, s: f64) -> Result<f64> {
    let (theta, dtheta) = table.theta_parts(s)?;
    let nf = table.n as f64;
    let (sh, ch) = (s.sinh(), s.cosh());
    let inner = if s < 20.0 {
        dtheta * sh / (ch * ch) - (nf - 2.0) * theta / ch - 2.0 * theta * sh * sh / (ch * ch * ch)
    } else {
        let l = dtheta / theta - (nf - 2.0) * coth(s) - 2.0 * s.tanh();
        (table.log_g(s, theta) + (nf - 1.0) * ln_sinh(s)).exp() * l / table.kappa()
    };
    Ok(-sphere_area(table.n) * table.kappa() * inner)
}

/// Kernel samples for the CSV dump.
pub fn sample(table: &KernelTable, s_values: &[f64]) -> Result<Vec<KernelSample>> {
    s_values
        .iter()
        .map(|&s| {
            Ok(KernelSample {
                s,
                g: green0(table, s)?,
                gprime: green_prime(table, s)?,
                residual: ode_residual(table, s)?,
                flux: flux(table, s)?,
            })
        })
        .collect()
}
