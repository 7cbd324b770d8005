//! Elementary special functions used by the kernel and geometry code.

use std::f64::consts::PI;

/// Gamma function at a positive integer or half-integer argument.
///
/// Exact up to rounding via the recurrence from Γ(1) = 1 and Γ(1/2) = √π.
pub fn gamma_half_integer(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!(
        twice >= 1.0 && (2.0 * x - twice).abs() < 1e-12,
        "gamma_half_integer: {x} is not a positive half-integer"
    );
    let k = twice as i64;
    let (mut value, mut arg) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while arg + 0.5 < x {
        value *= arg;
        arg += 1.0;
    }
    value
}

/// Area of the unit sphere S^{n−1} ⊂ R^n.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n as f64 / 2.0)
}

/// ln sinh(s) for s > 0, accurate for large s.
pub fn ln_sinh(s: f64) -> f64 {
    if s < 1.0 {
        s.sinh().ln()
    } else {
        s - std::f64::consts::LN_2 + (-(-2.0 * s).exp()).ln_1p()
    }
}

/// ln cosh(s), accurate for large |s|.
pub fn ln_cosh(s: f64) -> f64 {
    let a = s.abs();
    a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
}

/// coth(s) for s > 0.
pub fn coth(s: f64) -> f64 {
    if s > 20.0 {
        1.0 + 2.0 * (-2.0 * s).exp()
    } else {
        1.0 / s.tanh()
    }
}
