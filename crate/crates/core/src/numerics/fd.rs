//! Finite-difference weights on arbitrary grids.

/// Fornberg weights: `c[k][j]` is the weight of `f(xs[j])` in the k-th derivative at `x0`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let np = xs.len();
    let mut c = vec![vec![0.0; np]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// `order`-th derivative of grid samples using `width`-point stencils, centered where
/// possible and one-sided near the ends.
pub fn derivative(x: &[f64], y: &[f64], order: usize, width: usize) -> Vec<f64> {
    let m = x.len();
    assert!(m >= width && width > order);
    (0..m)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(m - width);
            let xs = &x[start..start + width];
            let c = fornberg(x[i], xs, order);
            c[order].iter().zip(&y[start..start + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Sixth-order central first derivative of `f` at `x` with step `h`.
pub fn central6<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    (45.0 * (f(x + h) - f(x - h)) - 9.0 * (f(x + 2.0 * h) - f(x - 2.0 * h)) + (f(x + 3.0 * h) - f(x - 3.0 * h)))
        / (60.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_weights() {
        let c = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((c[1][j] - d1[j]).abs() < 1e-14);
            assert!((c[2][j] - d2[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn grid_derivative_nonuniform() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.05).powf(1.2)).collect();
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let d = derivative(&x, &y, 1, 5);
        for (t, v) in x.iter().zip(&d) {
            assert!((v - t.cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn central6_accuracy() {
        let d = central6(f64::exp, 0.3, 0.01);
        assert!((d - 0.3f64.exp()).abs() < 1e-13);
    }
}
