//! Hyperbolic space in the hyperboloid model, with the Poincaré ball as a chart.
//!
//! Points live on the upper sheet −t² + |x|² = −1. Translations, distances and the ball
//! chart are exact closed forms; distances switch to a chordal formula for nearby points and
//! to a logarithmic form far away so they stay accurate for t up to about 1e12.

use crate::error::{Error, Result};

/// A point (t, x) on the upper hyperboloid.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    t: f64,
    x: Vec<f64>,
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    x: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

impl HyperboloidPoint {
    /// The point with spatial part `x`; t = √(1+|x|²).
    pub fn from_spatial(x: Vec<f64>) -> Self {
        let t = (1.0 + norm2(&x)).sqrt();
        HyperboloidPoint { t, x }
    }

    /// Checked constructor.
    pub fn new(t: f64, x: Vec<f64>) -> Result<Self> {
        let p = HyperboloidPoint { t, x };
        if !(t >= 1.0) || p.quadric_defect().abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "point off the hyperboloid: t = {t}, defect {:e}",
                p.quadric_defect()
            )));
        }
        Ok(p)
    }

    pub fn origin(n: usize) -> Self {
        HyperboloidPoint { t: 1.0, x: vec![0.0; n] }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Relative violation of −t² + |x|² = −1.
    pub fn quadric_defect(&self) -> f64 {
        (1.0 + norm2(&self.x) - self.t * self.t) / (self.t * self.t)
    }

    /// The point with spatial part −x.
    pub fn reflect(&self) -> Self {
        HyperboloidPoint { t: self.t, x: self.x.iter().map(|v| -v).collect() }
    }
}

impl BallPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        let r2 = norm2(&x);
        if !(r2 < 1.0) {
            return Err(Error::InvalidInput(format!("ball point with |x|² = {r2} is not inside the unit ball")));
        }
        Ok(BallPoint { x })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
}

/// Ball chart to hyperboloid: x = 2x̄/(1−|x̄|²), t = (1+|x̄|²)/(1−|x̄|²).
pub fn lift(b: &BallPoint) -> HyperboloidPoint {
    let r2 = norm2(&b.x);
    let den = 1.0 - r2;
    HyperboloidPoint { t: (1.0 + r2) / den, x: b.x.iter().map(|v| 2.0 * v / den).collect() }
}

/// Hyperboloid to ball chart: x̄ = x/(1+t).
pub fn project(p: &HyperboloidPoint) -> BallPoint {
    BallPoint { x: p.x.iter().map(|v| v / (1.0 + p.t)).collect() }
}

/// Translation T_b(x) = x + t_x b + (x·b)/(1+t_b) b, mapping the origin to the point with
/// spatial part b. The time coordinate of the result is recomputed from its spatial part.
pub fn translate(b: &[f64], p: &HyperboloidPoint) -> HyperboloidPoint {
    assert_eq!(b.len(), p.dim(), "translate: dimension mismatch");
    let tb = (1.0 + norm2(b)).sqrt();
    let k = p.t + dot(&p.x, b) / (1.0 + tb);
    HyperboloidPoint::from_spatial(p.x.iter().zip(b).map(|(x, bv)| x + k * bv).collect())
}

/// Hyperbolic distance from cosh d = t_x t_y − x·y.
pub fn distance(p: &HyperboloidPoint, q: &HyperboloidPoint) -> Result<f64> {
    assert_eq!(p.dim(), q.dim(), "distance: dimension mismatch");
    let z = p.t * q.t - dot(&p.x, &q.x);
    let scale = (p.t * q.t).max(1.0);
    if z < 1.0 - 1e-12 * scale || !z.is_finite() {
        return Err(Error::InvalidInput(format!("distance: cosh argument {z} below 1")));
    }
    if z < 2.0 {
        let dx: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a - b).collect();
        let sx: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
        let dt = dot(&dx, &sx) / (p.t + q.t);
        let chord2 = (norm2(&dx) - dt * dt).max(0.0);
        Ok(2.0 * (0.5 * chord2.sqrt()).asinh())
    } else {
        Ok(z.ln() + (1.0 - 1.0 / (z * z)).sqrt().ln_1p())
    }
}

/// Translation in the ball model:
/// τ_b̄(x̄) = [(1−|b̄|²)x̄ + (|x̄|² + 2x̄·b̄ + 1)b̄] / (|x̄|²|b̄|² + 2x̄·b̄ + 1).
pub fn ball_translate(b: &BallPoint, x: &BallPoint) -> BallPoint {
    let bb = norm2(&b.x);
    let xx = norm2(&x.x);
    let xb = dot(&x.x, &b.x);
    let den = xx * bb + 2.0 * xb + 1.0;
    let cb = xx + 2.0 * xb + 1.0;
    BallPoint { x: x.x.iter().zip(&b.x).map(|(xv, bv)| ((1.0 - bb) * xv + cb * bv) / den).collect() }
}
