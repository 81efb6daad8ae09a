//! Adaptive Dormand-Prince 5(4) integrator on flat real state vectors.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, initial_step: None, max_step: f64::INFINITY, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

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
// fifth-order weights equal the last row of A (FSAL); E = b5 - b4
const E: [f64; 7] = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Integrate y' = f(t, y) from t0 to t1 in place.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y: &mut [f64], opts: &OdeOptions) -> Result<OdeStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    integrate_projected(f, |_| {}, t0, t1, y, opts)
}

/// As [`integrate`], calling `project` on the state after every accepted step
/// (used to re-impose structural symmetries).
pub fn integrate_projected<F, P>(mut f: F, mut project: P, t0: f64, t1: f64, y: &mut [f64], opts: &OdeOptions) -> Result<OdeStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    let mut stats = OdeStats::default();
    if !(t1 >= t0) {
        return Err(Error::Integration { t: t0, reason: format!("end time {t1} precedes start time {t0}") });
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(stats);
    }
    let n = y.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    f(t0, y, &mut k[0]);
    stats.evaluations += 1;

    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            let d0 = rms_scaled(y, y, opts);
            let d1 = rms_scaled(&k[0], y, opts);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            h0.min(span)
        }
    }
    .min(opts.max_step)
    .max(span * 1e-14);
    let mut t = t0;

    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration { t, reason: format!("step budget of {} exhausted", opts.max_steps) });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * span;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += h * a * kj[i];
                    }
                }
                ytmp[i] = acc;
            }
            f(t + C[s] * h, &ytmp, &mut k[s]);
            stats.evaluations += 1;
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
        }
        // the stage-6 input is the fifth-order solution; k[6] is f at it
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                if E[s] != 0.0 {
                    e += E[s] * ks[i];
                }
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err = err.max((h * e).abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&ynew);
            project(y);
            stats.accepted += 1;
            if last {
                break;
            }
            // FSAL; the projection only removes roundoff so the last stage is reused
            k.swap(0, 6);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.max_step);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if h < span * 1e-15 || h < 1e-300 {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e}) meeting tolerance") });
        }
    }
    Ok(stats)
}

fn rms_scaled(v: &[f64], y: &[f64], opts: &OdeOptions) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().zip(y).map(|(a, b)| (a / (opts.atol + opts.rtol * b.abs())).powi(2)).sum::<f64>() / n).sqrt()
}
