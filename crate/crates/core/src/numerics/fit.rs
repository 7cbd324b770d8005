//! Linear least-squares fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Result of a polynomial least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Coefficients c₀, c₁, … of Σ c_k x^k.
    pub coeffs: Vec<f64>,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Least-squares fit of y by a polynomial of the given degree in x.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    let m = x.len();
    if m != y.len() || m <= degree {
        return Err(Error::InvalidInput(format!("polyfit: {m} samples for degree {degree}")));
    }
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(m, degree + 1, |i, j| (x[i] / scale).powi(j as i32));
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numerical(format!("polyfit: {e}")))?;
    let resid = &a * &sol - &b;
    let coeffs = (0..=degree).map(|j| sol[j] / scale.powi(j as i32)).collect();
    Ok(PolyFit { coeffs, rms: (resid.norm_squared() / m as f64).sqrt() })
}

/// Least-squares coefficients for y ≈ Σ c_j columns[j], with column equilibration.
pub fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Result<PolyFit> {
    let m = y.len();
    let k = columns.len();
    if m <= k || columns.iter().any(|c| c.len() != m) {
        return Err(Error::InvalidInput(format!("lstsq: {m} samples for {k} columns")));
    }
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(m, k, |i, j| columns[j][i] / scales[j]);
    let b = DVector::from_column_slice(y);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-15)
        .map_err(|e| Error::Numerical(format!("lstsq: {e}")))?;
    let resid = &a * &sol - &b;
    Ok(PolyFit {
        coeffs: (0..k).map(|j| sol[j] / scales[j]).collect(),
        rms: (resid.norm_squared() / m as f64).sqrt(),
    })
}

/// Straight-line fit, returning (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let m = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::InvalidInput("linear_fit: need at least two samples".into()));
    }
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("linear_fit: degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cubic() {
        let x: Vec<f64> = (0..30).map(|i| 0.01 + 0.01 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| 0.2 - 0.5 * t + 3.0 * t * t * t).collect();
        let p = polyfit(&x, &y, 3).unwrap();
        assert!((p.coeffs[0] - 0.2).abs() < 1e-12);
        assert!((p.coeffs[3] - 3.0).abs() < 1e-8);
        assert!(p.rms < 1e-14);
    }

    #[test]
    fn general_columns() {
        let x: Vec<f64> = (0..40).map(|i| 0.01 + 0.005 * i as f64).collect();
        let cols = vec![x.iter().map(|t| t.cosh()).collect(), x.iter().map(|t| t.powi(3)).collect::<Vec<_>>()];
        let y: Vec<f64> = x.iter().map(|t| 1e-14 * t.cosh() + 0.7 * t.powi(3)).collect();
        let f = lstsq(&cols, &y).unwrap();
        assert!((f.coeffs[0] - 1e-14).abs() < 1e-18);
        assert!((f.coeffs[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn line() {
        let (s, c) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
    }
}
