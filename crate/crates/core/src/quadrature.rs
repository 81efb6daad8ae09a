//! Gauss-Legendre rules and composite adaptive quadrature.

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    if n == 0 {
        (1.0, 0.0)
    } else {
        (p1, d)
    }
}

/// Nodes and weights for `panels` equal panels of an `order`-point rule on [a, b].
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre with panel doubling until successive estimates
/// agree within `tol` (absolute, relative to max(1, |I|)).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const ORDER: usize = 16;
    let mut panels = 1;
    let mut prev = apply(&mut f, a, b, panels, ORDER);
    for _ in 0..14 {
        panels *= 2;
        let cur = apply(&mut f, a, b, panels, ORDER);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("no convergence to {tol:e} on [{a}, {b}] after {panels} panels")))
}

fn apply<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = composite_rule(a, b, panels, order);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 40, 64] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = gauss_legendre(33);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = integrate_adaptive(|t| (40.0 * t).cos(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 40f64.sin() / 40.0).abs() < 1e-13);
    }
}
