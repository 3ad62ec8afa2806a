//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`). `lambda` only tags
/// step-underflow errors.
pub fn integrate<const D: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: [f64; D],
    tol: Tolerance,
    lambda: f64,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = span.min(0.05);
    let h_min = 1e-14 * t1.abs().max(1.0);
    loop {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let t_new = if last { t1 } else { t + h };
        let k6 = f(
            t_new,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t_new, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..D {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::StepUnderflow { x: t, lambda });
        }
        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                return Ok(y);
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min {
            return Err(Error::StepUnderflow { x: t, lambda });
        }
    }
}

/// Integrate across consecutive `breaks` (sorted, covering `[breaks[0], breaks.last()]`),
/// restarting the step sequence at each break.
pub fn integrate_piecewise<const D: usize, F>(
    f: F,
    breaks: &[f64],
    y0: [f64; D],
    tol: Tolerance,
    lambda: f64,
) -> Result<[f64; D]>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut y = y0;
    for w in breaks.windows(2) {
        y = integrate(&f, w[0], w[1], y, tol, lambda)?;
    }
    Ok(y)
}
