//! Adaptive Dormand–Prince 5(4) stepping for small autonomous ODE systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub(crate) struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

const MAX_STEPS: usize = 1_000_000;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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

/// Integrates `y' = f(t, y)` from `t = 0` and returns the state at each of
/// the (ascending, non-negative) output times.
pub(crate) fn integrate<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t_out: &[f64],
    tol: Tolerances,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(t_out.len());
    let mut t = 0.0;
    let mut y = y0;
    let mut h = 1e-3;
    let mut steps = 0usize;

    for &target in t_out {
        if target.is_nan() || target < t {
            return Err(Error::Numerical(format!(
                "output times must be ascending and non-negative (got {target} after {t})"
            )));
        }
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Numerical(format!("no convergence after {MAX_STEPS} steps")));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let (y_new, err) = dopri_step(&f, t, &y, step, tol);
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite error estimate at t = {t}")));
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if h < 1e-14 {
                return Err(Error::Numerical(format!("step size underflow at t = {t}")));
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dopri_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    h: f64,
    tol: Tolerances,
) -> ([f64; N], f64)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..N {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut acc = 0.0;
    for i in 0..N {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
        let e = h * (d5 - d4) / scale;
        acc += e * e;
    }
    (y5, (acc / N as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances { abs: 1e-10, rel: 1e-10 };

    #[test]
    fn exponential_decay() {
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let ys = integrate(|_, y: &[f64; 1]| [-y[0]], [1.0], &ts, TOL).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_oscillator() {
        let ts = [0.0, 1.0, 3.0, 10.0];
        let ys = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], &ts, TOL).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8);
            assert!((y[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_descending_times() {
        let r = integrate(|_, y: &[f64; 1]| [-y[0]], [1.0], &[1.0, 0.5], TOL);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
