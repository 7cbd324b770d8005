//! Adaptive Dormand–Prince 5(4) integration for small first-order systems.

use crate::error::{Error, Result};

/// Tolerances and limits for [`dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-14, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate y′ = f(t, y) from `t0` and return the state at each output time.
///
/// Output times must be monotone in the direction of integration; steps are clipped so
/// every output time is hit exactly.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], opts: OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut out = Vec::with_capacity(t_out.len());
    let span = t_out.last().map(|&e| (e - t0).abs()).unwrap_or(0.0);
    let mut h = (span * 1e-3).max(1e-8);
    let mut steps = 0usize;
    for &target in t_out {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t).abs() > 1e-15 * t.abs().max(1.0) {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Convergence(format!("dopri5: step limit reached at t = {t}")));
            }
            let mut last = false;
            if h >= (target - t).abs() {
                h = (target - t).abs();
                last = true;
            }
            let hs = dir * h;
            f(t, &y, &mut k[0]);
            for stage in 1..7 {
                for i in 0..dim {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(stage) {
                        acc += hs * A[stage][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                let (head, tail) = k.split_at_mut(stage);
                let _ = head;
                f(t + C[stage] * hs, &tmp, &mut tail[0]);
            }
            let mut err = 0.0f64;
            for i in 0..dim {
                let mut s5 = y[i];
                let mut s4 = y[i];
                for j in 0..7 {
                    s5 += hs * B5[j] * k[j][i];
                    s4 += hs * B4[j] * k[j][i];
                }
                y5[i] = s5;
                let sc = opts.atol + opts.rtol * y[i].abs().max(s5.abs());
                err = err.max(((s5 - s4) / sc).abs());
            }
            if !err.is_finite() {
                return Err(Error::Numerical(format!("dopri5: non-finite state near t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + hs };
                y.copy_from_slice(&y5);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Convergence(format!("dopri5: step size underflow at t = {t}")));
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
