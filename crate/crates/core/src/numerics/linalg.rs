//! Tridiagonal direct solves.

use crate::error::{Error, Result};

/// Solve a tridiagonal system by the Thomas algorithm.
///
/// `sub[i]` multiplies x[i−1] in row i (sub[0] unused), `sup[i]` multiplies x[i+1]
/// (last entry unused).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    assert!(sub.len() == m && sup.len() == m && rhs.len() == m);
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let row_scale = |i: usize| diag[i].abs() + sub[i].abs() + sup[i].abs();
    let mut piv = diag[0];
    if piv.abs() <= 1e-14 * row_scale(0) || piv == 0.0 {
        return Err(Error::Numerical("tridiagonal solve: zero pivot in row 0".into()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..m {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv.abs() <= 1e-14 * row_scale(i) || piv == 0.0 || !piv.is_finite() {
            return Err(Error::Numerical(format!("tridiagonal solve: singular pivot in row {i}")));
        }
        c[i] = sup[i] / piv;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_matrix() {
        let m = 50;
        let sub = vec![-1.0; m];
        let sup = vec![-1.0; m];
        let diag = vec![2.0; m];
        let x_true: Vec<f64> = (0..m).map(|i| (i as f64 * 0.3).sin()).collect();
        let rhs: Vec<f64> = (0..m)
            .map(|i| {
                let l = if i > 0 { x_true[i - 1] } else { 0.0 };
                let r = if i + 1 < m { x_true[i + 1] } else { 0.0 };
                2.0 * x_true[i] - l - r
            })
            .collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for i in 0..m {
            assert!((x[i] - x_true[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn singular_reported() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(r.is_err());
    }
}
