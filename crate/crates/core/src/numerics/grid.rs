//! Radial grids: uniform, and graded around an interior point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a grid graded symmetrically around `center`.
///
/// The local spacing is `h_core` within `core_half` of the center and grows linearly with
/// slope `growth` beyond it, capped at `h_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedSpec {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub h_core: f64,
    pub core_half: f64,
    pub growth: f64,
    pub h_max: f64,
}

/// A strictly increasing set of nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub s: Vec<f64>,
}

impl Grid {
    /// `cells + 1` equally spaced nodes on [a, b].
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Grid> {
        if !(b > a) || cells == 0 {
            return Err(Error::InvalidInput(format!("uniform grid on [{a}, {b}] with {cells} cells")));
        }
        let h = (b - a) / cells as f64;
        let mut s: Vec<f64> = (0..=cells).map(|i| a + h * i as f64).collect();
        s[cells] = b;
        Ok(Grid { s })
    }

    /// Graded grid with a node exactly at `spec.center`.
    pub fn graded(spec: &GradedSpec) -> Result<Grid> {
        let GradedSpec { lo, hi, center, h_core, core_half, growth, h_max } = *spec;
        if !(lo < center && center < hi) || h_core <= 0.0 || growth <= 0.0 || h_max < h_core || core_half < 0.0 {
            return Err(Error::InvalidInput(format!("invalid graded grid {spec:?}")));
        }
        let map = SpacingMap { h_core, core_half, growth, h_max };
        let left = map.side(center - lo);
        let right = map.side(hi - center);
        let mut s = Vec::with_capacity(left.len() + right.len() + 1);
        for d in left.iter().rev() {
            s.push(center - d);
        }
        s.push(center);
        for d in &right {
            s.push(center + d);
        }
        s[0] = lo;
        let last = s.len() - 1;
        s[last] = hi;
        Ok(Grid { s })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.s.partition_point(|&v| v < x);
        if i == 0 {
            0
        } else if i >= self.s.len() {
            self.s.len() - 1
        } else if (self.s[i] - x) < (x - self.s[i - 1]) {
            i
        } else {
            i - 1
        }
    }

    /// Largest spacing.
    pub fn max_spacing(&self) -> f64 {
        self.s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

struct SpacingMap {
    h_core: f64,
    core_half: f64,
    growth: f64,
    h_max: f64,
}

impl SpacingMap {
    fn ramp_end(&self) -> f64 {
        self.core_half + (self.h_max - self.h_core) / self.growth
    }

    /// Cell count F(d) = ∫₀^d dx / h(x).
    fn count(&self, d: f64) -> f64 {
        let c = self.core_half;
        if d <= c {
            return d / self.h_core;
        }
        let e = self.ramp_end();
        let base = c / self.h_core;
        if d <= e {
            return base + ((self.h_core + self.growth * (d - c)) / self.h_core).ln() / self.growth;
        }
        base + (self.h_max / self.h_core).ln() / self.growth + (d - e) / self.h_max
    }

    fn inverse(&self, q: f64) -> f64 {
        let c = self.core_half;
        let base = c / self.h_core;
        if q <= base {
            return q * self.h_core;
        }
        let ramp = (self.h_max / self.h_core).ln() / self.growth;
        if q <= base + ramp {
            let h = self.h_core * (self.growth * (q - base)).exp();
            return c + (h - self.h_core) / self.growth;
        }
        self.ramp_end() + (q - base - ramp) * self.h_max
    }

    /// Offsets (excluding 0) of the nodes on one side, ending exactly at `length`.
    fn side(&self, length: f64) -> Vec<f64> {
        let total = self.count(length);
        let cells = total.ceil().max(1.0) as usize;
        let scale = total / cells as f64;
        let mut out: Vec<f64> = (1..=cells).map(|k| self.inverse(k as f64 * scale)).collect();
        out[cells - 1] = length;
        out
    }
}
