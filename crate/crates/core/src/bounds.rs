//! Noise/accuracy tradeoff calculators and concatenated-code overhead.
//!
//! Every mapping has an error bound of the form mapping-error + noise-error,
//! where the first falls and the second grows with simulation effort. Only the
//! exponents are meaningful; the prefactors `c_map` and `c_noise` default to 1
//! and are there so callers can plug in measured constants.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingKind {
    Trotter,
    FloquetMagnus,
    SchriefferWolff,
}

impl MappingKind {
    pub fn name(self) -> &'static str {
        match self {
            MappingKind::Trotter => "trotter",
            MappingKind::FloquetMagnus => "floquet-magnus",
            MappingKind::SchriefferWolff => "schrieffer-wolff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffConstants {
    pub c_map: f64,
    pub c_noise: f64,
}

impl Default for TradeoffConstants {
    fn default() -> Self {
        TradeoffConstants { c_map: 1.0, c_noise: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffResult {
    pub kind: MappingKind,
    pub p: usize,
    pub d: usize,
    pub gamma: f64,
    pub tau: f64,
    /// Trotter step count T (an integer stored as f64) or the period uptau.
    /// Zeroth-order Floquet-Magnus has no finite optimum and reports 0.
    pub control: f64,
    pub alpha_exponent: f64,
    pub error_bound: f64,
    /// τ·γ^{-e} with the mapping's exponent e and unit prefactor.
    pub t_sim_bound: f64,
}

fn check_common(gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("gamma", "noise rate must be positive"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", "evolution time must be positive"));
    }
    if !(c.c_map > 0.0 && c.c_noise > 0.0) {
        return Err(invalid("constants", "c_map and c_noise must be positive"));
    }
    Ok(())
}

/// c_map·τ^{d+p+1}/T^p + c_noise·γ·T^{d+1}.
pub fn trotter_objective(p: usize, d: usize, tau: f64, gamma: f64, c: &TradeoffConstants, t: f64) -> f64 {
    c.c_map * tau.powi((d + p + 1) as i32) / t.powi(p as i32) + c.c_noise * gamma * t.powi(d as i32 + 1)
}

/// Minimise the Trotter objective over integers T ≥ 1. Returns (T, value).
fn trotter_integer_min(p: usize, d: usize, tau: f64, gamma: f64, c: &TradeoffConstants) -> (f64, f64) {
    // stationary point of the continuous objective
    let t_star = (p as f64 * c.c_map * tau.powi((d + p + 1) as i32) / ((d + 1) as f64 * c.c_noise * gamma)).powf(1.0 / (p + d + 1) as f64);
    let f = |t: f64| trotter_objective(p, d, tau, gamma, c, t);
    if !t_star.is_finite() || t_star > 1.0e15 {
        // integer rounding is immaterial at this size
        let t = t_star.min(f64::MAX).round();
        return (t, f(t));
    }
    let base = t_star.floor();
    let mut best = (f64::NAN, f64::INFINITY);
    for k in -2..=3 {
        let t = base + k as f64;
        if t < 1.0 {
            continue;
        }
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

pub fn trotter_tradeoff(p: usize, d: usize, gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<TradeoffResult> {
    check_common(gamma, tau, c)?;
    if p == 0 {
        return Err(invalid("p", "Trotter order must be at least 1"));
    }
    let (t, err) = trotter_integer_min(p, d, tau, gamma, c);
    let e = (p + d + 1) as f64;
    Ok(TradeoffResult {
        kind: MappingKind::Trotter,
        p,
        d,
        gamma,
        tau,
        control: t,
        alpha_exponent: p as f64 / e,
        error_bound: err,
        t_sim_bound: tau * gamma.powf(-1.0 / e),
    })
}

/// Minimise a·u + b/u^k over u > 0 by golden-section search in ln u.
/// The objective is convex in ln u, so bracketing by decades is enough.
fn minimize_power_pair(a: f64, b: f64, k: f64) -> (f64, f64) {
    let f = |x: f64| a * x.exp() + b * (-k * x).exp();
    let mut lo = 0.0_f64;
    let mut hi = 0.0_f64;
    let step = std::f64::consts::LN_10;
    while f(lo - step) < f(lo) {
        lo -= step;
    }
    while f(hi + step) < f(hi) {
        hi += step;
    }
    lo -= step;
    hi += step;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x.exp(), f(x))
}

/// Shared shape of the Floquet-Magnus and perturbative bounds:
/// τ^{d+1}(c_map·uptau + c_noise·γ/uptau^k).
#[allow(clippy::too_many_arguments)]
fn period_tradeoff(kind: MappingKind, p: usize, d: usize, k: usize, t_sim_exp: usize, gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<TradeoffResult> {
    check_common(gamma, tau, c)?;
    let scale = tau.powi(d as i32 + 1);
    let (control, error_bound) = if k == 0 {
        (0.0, scale * c.c_noise * gamma)
    } else {
        let (u, v) = minimize_power_pair(c.c_map, c.c_noise * gamma, k as f64);
        (u, scale * v)
    };
    let denom = (k + 1) as f64;
    Ok(TradeoffResult { kind, p, d, gamma, tau, control, alpha_exponent: 1.0 / denom, error_bound, t_sim_bound: tau * gamma.powf(-(t_sim_exp as f64) / denom) })
}

pub fn fm_tradeoff(p: usize, d: usize, gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<TradeoffResult> {
    period_tradeoff(MappingKind::FloquetMagnus, p, d, p * (d + 1), p, gamma, tau, c)
}

pub fn sw_tradeoff(p: usize, d: usize, gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<TradeoffResult> {
    period_tradeoff(MappingKind::SchriefferWolff, p, d, p * (d + 1) + 1, p + 1, gamma, tau, c)
}

pub fn tradeoff(kind: MappingKind, p: usize, d: usize, gamma: f64, tau: f64, c: &TradeoffConstants) -> Result<TradeoffResult> {
    match kind {
        MappingKind::Trotter => trotter_tradeoff(p, d, gamma, tau, c),
        MappingKind::FloquetMagnus => fm_tradeoff(p, d, gamma, tau, c),
        MappingKind::SchriefferWolff => sw_tradeoff(p, d, gamma, tau, c),
    }
}

/// Concatenated-code setting for a Trotterized circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct FTParams {
    /// physical fault rate ξ₀
    pub xi0: f64,
    /// threshold ξ_th
    pub xi_th: f64,
    /// base code corrects t faults (distance 2t+1)
    pub t: u32,
    pub levels: u32,
    /// target precision δ for `required_l`
    pub delta: f64,
    pub tau: f64,
    pub d: usize,
    pub p: usize,
    pub constants: TradeoffConstants,
}

impl FTParams {
    pub fn new(xi0: f64, xi_th: f64, t: u32, levels: u32, delta: f64) -> Self {
        FTParams { xi0, xi_th, t, levels, delta, tau: 1.0, d: 1, p: 2, constants: TradeoffConstants::default() }
    }

    /// ξ_th/ξ₀, the quantity whose logarithm sets how fast levels help.
    pub fn threshold_ratio(&self) -> f64 {
        self.xi_th / self.xi0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FTRecord {
    pub xi_l: f64,
    pub optimal_t: f64,
    pub total_error: f64,
    pub required_l: u32,
    /// ⌈log_{t+1}((p+d+1)/p · ln(τ^{d+1}/δ) / ln(ξ_th/ξ₀))⌉, clamped at 0.
    pub closed_form_l: u32,
}

/// Largest level count searched before giving up.
pub const MAX_LEVELS: u32 = 64;

/// ξ_L = ξ_th (ξ₀/ξ_th)^{(t+1)^L}.
pub fn logical_rate(xi0: f64, xi_th: f64, t: u32, levels: u32) -> f64 {
    xi_th * (xi0 / xi_th).powf(((t + 1) as f64).powi(levels as i32))
}

fn check_ft(params: &FTParams) -> Result<()> {
    if !(params.xi0 > 0.0 && params.xi_th > 0.0 && params.xi_th <= 1.0) {
        return Err(invalid("xi", "need ξ₀ > 0 and 0 < ξ_th ≤ 1"));
    }
    if params.xi0 >= params.xi_th {
        return Err(Error::BelowThresholdRequired { xi0: params.xi0, xi_th: params.xi_th });
    }
    if params.t < 1 {
        return Err(invalid("t", "base code must correct at least one fault"));
    }
    if params.p == 0 {
        return Err(invalid("p", "Trotter order must be at least 1"));
    }
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(invalid("delta", "target precision must lie in (0, 1)"));
    }
    check_common(1.0, params.tau, &params.constants)
}

fn level_error(params: &FTParams, levels: u32) -> (f64, f64, f64) {
    let xi_l = logical_rate(params.xi0, params.xi_th, params.t, levels);
    if xi_l == 0.0 {
        return (0.0, f64::INFINITY, 0.0);
    }
    let (t, err) = trotter_integer_min(params.p, params.d, params.tau, xi_l, &params.constants);
    (xi_l, t, err)
}

pub fn closed_form_levels(params: &FTParams) -> Result<u32> {
    check_ft(params)?;
    let (p, d) = (params.p as f64, params.d as f64);
    let lead = (p + d + 1.0) / p * (params.tau.powf(d + 1.0) / params.delta).ln() / params.threshold_ratio().ln();
    if lead <= 1.0 {
        return Ok(0);
    }
    Ok((lead.ln() / ((params.t + 1) as f64).ln()).ceil().max(0.0) as u32)
}

pub fn ft_overhead(params: &FTParams) -> Result<FTRecord> {
    check_ft(params)?;
    let (xi_l, optimal_t, total_error) = level_error(params, params.levels);
    let required_l = (0..=MAX_LEVELS)
        .find(|&l| level_error(params, l).2 <= params.delta)
        .ok_or_else(|| invalid("delta", format!("not reachable within {MAX_LEVELS} levels")))?;
    Ok(FTRecord { xi_l, optimal_t, total_error, required_l, closed_form_l: closed_form_levels(params)? })
}
