//! Perturbative (Schrieffer-Wolff-type) expansion of uptau·M + P for a sum P of
//! commuting projectors.
//!
//! 𝔼 averages over the integer-spectrum flow e^{i2πsP}, which for integer
//! eigenvalues is exactly the block-diagonal part over P-eigenspaces.

use crate::dense::{evolve_lindblad_dense, expectation, sigma_x, sigma_y, site_operator, DenseDrive, DenseOperator, DenseState, Dissipator};
use crate::error::{invalid, Error, Result};
use crate::linalg::{commutator, expm, graded_commutator_series, hermiticity_defect, op_norm, CMat, I};
use crate::quadrature::composite_rule;
use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Commuting orthogonal projectors P_α and the eigenspaces of P = Σ P_α.
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    n: usize,
    projectors: Vec<CMat>,
    sum: CMat,
    /// (integer eigenvalue, spectral projector)
    sectors: Vec<(i64, CMat)>,
}

impl ProjectorFamily {
    pub fn new(n: usize, projectors: Vec<CMat>) -> Result<Self> {
        let dim = 1usize << n;
        if projectors.is_empty() {
            return Err(invalid("P", "need at least one projector"));
        }
        for (a, p) in projectors.iter().enumerate() {
            if p.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: p.nrows() });
            }
            if hermiticity_defect(p) > 1e-10 || op_norm(&(p * p - p)) > 1e-10 {
                return Err(invalid("P", format!("P_{a} is not an orthogonal projector")));
            }
            for q in &projectors[..a] {
                if op_norm(&commutator(p, q)) > 1e-10 {
                    return Err(invalid("P", format!("P_{a} does not commute with an earlier projector")));
                }
            }
        }
        let mut sum = CMat::zeros(dim, dim);
        for p in &projectors {
            sum += p;
        }
        let eig = SymmetricEigen::new(sum.clone());
        let mut sectors: Vec<(i64, CMat)> = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let r = lam.round();
            if (lam - r).abs() > 1e-8 {
                return Err(Error::NonIntegerSpectrum(lam));
            }
            let v = eig.eigenvectors.column(k);
            let proj = v * v.adjoint();
            match sectors.iter_mut().find(|(e, _)| *e == r as i64) {
                Some((_, m)) => *m += proj,
                None => sectors.push((r as i64, proj)),
            }
        }
        sectors.sort_by_key(|(e, _)| *e);
        Ok(ProjectorFamily { n, projectors, sum, sectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projectors(&self) -> &[CMat] {
        &self.projectors
    }

    pub fn sum(&self) -> &CMat {
        &self.sum
    }

    pub fn sectors(&self) -> &[(i64, CMat)] {
        &self.sectors
    }
}

/// 𝔼(A) = ∫₀¹ e^{i2πsP} A e^{−i2πsP} ds, i.e. Σ_m Π_m A Π_m.
pub fn project_time_average(a: &CMat, p: &ProjectorFamily) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols());
    for (_, pi) in &p.sectors {
        out += pi * a * pi;
    }
    out
}

/// Solution of [Ω, P] = uptau·Y for Y without sector-diagonal blocks:
/// Ω_mn = uptau·Y_mn/(p_n − p_m).
pub fn solve_omega(y: &CMat, p: &ProjectorFamily, uptau: f64) -> CMat {
    let mut out = CMat::zeros(y.nrows(), y.ncols());
    for (em, pm) in &p.sectors {
        for (en, pn) in &p.sectors {
            if em == en {
                continue;
            }
            let gap = (*en - *em) as f64;
            out += pm * y * pn * Complex64::new(uptau / gap, 0.0);
        }
    }
    out
}

/// i·uptau ∫₀¹∫₀^{s₁} e^{i2πs₂P} Y e^{−i2πs₂P} ds₂ ds₁ by Gauss-Legendre.
/// For integer spectra this equals solve_omega(Y)/(2π).
pub fn omega_integral_form(y: &CMat, p: &ProjectorFamily, uptau: f64, points: usize) -> CMat {
    let (outer, wo) = composite_rule(0.0, 1.0, 4, points);
    let mut out = CMat::zeros(y.nrows(), y.ncols());
    for (s1, w1) in outer.iter().zip(&wo) {
        let (inner, wi) = composite_rule(0.0, *s1, 4, points);
        for (s2, w2) in inner.iter().zip(&wi) {
            let u = expm(&(p.sum() * (I * (2.0 * PI * s2))));
            out += &u * y * u.adjoint() * Complex64::new(w1 * w2, 0.0);
        }
    }
    out * (I * uptau)
}

#[derive(Debug, Clone)]
pub struct SwExpansion {
    pub order: usize,
    pub uptau: f64,
    /// Ω^(1..=order+1); the last order is what makes M̃^(p) + R^(p) exact with
    /// R^(p) = O(uptau^{p+1}).
    pub omegas: Vec<CMat>,
    /// G^(0..=order).
    pub g: Vec<CMat>,
    pub m_tilde: CMat,
    pub remainder: CMat,
    pub truncation_order: usize,
}

impl SwExpansion {
    pub fn omega_total(&self) -> CMat {
        let mut out = self.omegas[0].clone();
        for o in &self.omegas[1..] {
            out += o;
        }
        out
    }

    /// ‖e^{−Ω}(uptau·M + P)e^{Ω} − (uptau·M̃^(p) + P + uptau·R^(p))‖.
    pub fn conjugation_defect(&self, m: &CMat, p: &ProjectorFamily) -> f64 {
        let om = self.omega_total();
        let h = m * Complex64::new(self.uptau, 0.0) + p.sum();
        let lhs = expm(&(-&om)) * h * expm(&om);
        let rhs = (&self.m_tilde + &self.remainder) * Complex64::new(self.uptau, 0.0) + p.sum();
        op_norm(&(lhs - rhs))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn positive_compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 || total < k {
        return Vec::new();
    }
    crate::product_formula::compositions(total - k, k).into_iter().map(|c| c.into_iter().map(|x| x + 1).collect()).collect()
}

fn nested(omegas: &[CMat], comp: &[usize], x: &CMat) -> CMat {
    let mut out = x.clone();
    for &i in comp.iter().rev() {
        out = commutator(&omegas[i - 1], &out);
    }
    out
}

pub fn sw_recursion_dense(m: &CMat, p: &ProjectorFamily, uptau: f64, order: usize) -> Result<SwExpansion> {
    if order > 2 {
        return Err(invalid("p", "perturbative expansion implemented for p ≤ 2"));
    }
    if !(uptau > 0.0) {
        return Err(invalid("uptau", "must be positive"));
    }
    let dim = 1usize << p.n();
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
    }
    if hermiticity_defect(m) > 1e-10 {
        return Err(invalid("M", "must be Hermitian"));
    }
    let pm = p.sum();
    let mut g: Vec<CMat> = vec![m.clone()];
    let mut omegas: Vec<CMat> = Vec::new();
    for q in 0..=order {
        if q > 0 {
            let mut gq = CMat::zeros(dim, dim);
            for k in 1..=q {
                for comp in positive_compositions(q, k) {
                    gq += nested(&omegas, &comp, m) * Complex64::new(sign(k) / factorial(k), 0.0);
                }
            }
            // P words of total order q+1 with at least two factors (all-ones included)
            for k in 2..=q + 1 {
                for comp in positive_compositions(q + 1, k) {
                    gq += nested(&omegas, &comp, pm) * Complex64::new(sign(k) / (factorial(k) * uptau), 0.0);
                }
            }
            g.push(gq);
        }
        let y = &g[q] - project_time_average(&g[q], p);
        omegas.push(solve_omega(&y, p, uptau));
    }
    let mut m_tilde = CMat::zeros(dim, dim);
    for gq in &g {
        m_tilde += project_time_average(gq, p);
    }
    let (r_m, k1) = graded_commutator_series(&omegas, m, order + 1, 1, |k| Complex64::new(sign(k) / factorial(k), 0.0), 1e-12)?;
    let (r_p, k2) = graded_commutator_series(&omegas, pm, order + 2, 2, |k| Complex64::new(sign(k) / factorial(k), 0.0), 1e-12 * uptau)?;
    let remainder = r_m + r_p / Complex64::new(uptau, 0.0);
    Ok(SwExpansion { order, uptau, omegas, g, m_tilde, remainder, truncation_order: k1.max(k2) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwConstants {
    pub gammas: Vec<f64>,
    /// W_q = w·max_{r<q} Γ_r for q = 1..=p.
    pub w: Vec<f64>,
    pub gamma_tilde: f64,
    /// 2Γ̃_p e^{2pΓ̃_p}.
    pub c_p: f64,
}

/// Γ_q recursion with Γ_0 = ‖M‖⋆ and the remainder prefactor. The P words run
/// over k = 2..=q+1 factors, matching the recursion actually used.
pub fn sw_constants(star_norm_m: f64, star_norm_p: f64, w: f64, p: usize) -> Result<SwConstants> {
    if !(star_norm_m > 0.0 && star_norm_p > 0.0 && w > 0.0) {
        return Err(invalid("‖M‖⋆/‖P‖⋆/w", "must be positive"));
    }
    let mut g = vec![star_norm_m];
    let prod = |g: &[f64], comp: &[usize]| comp.iter().map(|&i| g[i - 1]).product::<f64>();
    for q in 1..=p {
        let mut v = 0.0;
        for k in 1..=q {
            let c = (2.0 * w).powi(k as i32) / factorial(k);
            for comp in positive_compositions(q, k) {
                v += c * g[0] * prod(&g, &comp);
            }
        }
        for k in 2..=q + 1 {
            let c = (2.0 * w).powi(k as i32) / factorial(k);
            for comp in positive_compositions(q + 1, k) {
                v += c * prod(&g, &comp) * star_norm_p;
            }
        }
        g.push(v);
    }
    let ws: Vec<f64> = (1..=p).map(|q| w * g[..q].iter().cloned().fold(0.0, f64::max)).collect();
    let gamma_tilde = ws.iter().cloned().fold(star_norm_m.max(star_norm_p), f64::max);
    let c_p = 2.0 * gamma_tilde * (2.0 * p as f64 * gamma_tilde).exp();
    Ok(SwConstants { gammas: g, w: ws, gamma_tilde, c_p })
}

/// Built-in benchmark: an open chain with P = Σ_{even bonds} (|01⟩⟨01| + |10⟩⟨10|),
/// M = Σ_bonds [(XX + YY)/2 + Δ·ZZ] with Δ = 1/2, O = n_0 and initial state |1010…0⟩.
/// The Ising part matters: with Δ = 0 the second-order correction leaves no
/// linear trace on ⟨n_0⟩ and the noiseless error falls as uptau² instead.
#[derive(Debug, Clone)]
pub struct SwDemo {
    pub m: CMat,
    pub projectors: ProjectorFamily,
    pub observable: CMat,
    pub initial: DenseState,
}

pub const SW_DEMO_ANISOTROPY: f64 = 0.5;

pub fn sw_demo(n: usize) -> Result<SwDemo> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid("N", "demo needs an even chain with N ≥ 4"));
    }
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for s in 0..n - 1 {
        m += (site_operator(n, &[(s, sigma_x()), (s + 1, sigma_x())]) + site_operator(n, &[(s, sigma_y()), (s + 1, sigma_y())])) * Complex64::new(0.5, 0.0);
    }
    let z = crate::dense::sigma_z();
    for s in 0..n - 1 {
        m += site_operator(n, &[(s, z.clone()), (s + 1, z.clone())]) * Complex64::new(SW_DEMO_ANISOTROPY, 0.0);
    }
    let projectors = (0..n / 2)
        .map(|b| {
            let zz = site_operator(n, &[(2 * b, z.clone()), (2 * b + 1, z.clone())]);
            (CMat::identity(dim, dim) - zz) * Complex64::new(0.5, 0.0)
        })
        .collect();
    let projectors = ProjectorFamily::new(n, projectors)?;
    let observable = crate::dense::number_operator(n, 0);
    let mut bits = vec![0u8; n];
    bits[0] = 1;
    bits[2] = 1;
    Ok(SwDemo { m, projectors, observable, initial: DenseState::basis(&bits)? })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwRecord {
    pub observable_sim: f64,
    pub observable_target: f64,
    pub abs_error: f64,
    pub t_sim: f64,
}

/// Run uptau·M + P for t_sim = τ/uptau^{p+1} with qubit depolarizing at rate
/// γ on every site, and compare ⟨O⟩ with exact evolution under H_0 for τ.
#[allow(clippy::too_many_arguments)]
pub fn run_sw(
    m: &CMat,
    p: &ProjectorFamily,
    h0: &CMat,
    order: usize,
    observable: &CMat,
    initial: &DenseState,
    tau: f64,
    uptau: f64,
    gamma: f64,
    tol: f64,
) -> Result<SwRecord> {
    if !(tau > 0.0 && uptau > 0.0 && gamma >= 0.0 && tol > 0.0) {
        return Err(invalid("tau/uptau/gamma/tol", "need τ, uptau, tol > 0 and γ ≥ 0"));
    }
    let defect = op_norm(&commutator(observable, p.sum()));
    if defect > 1e-8 {
        return Err(Error::ObservableNotCommuting(defect));
    }
    let n = p.n();
    let t_sim = tau / uptau.powi(order as i32 + 1);
    let h = DenseOperator::new(n, m * Complex64::new(uptau, 0.0) + p.sum())?;
    let dissipators: Vec<Dissipator> = (0..n).map(Dissipator::Qubit).collect();
    let end = evolve_lindblad_dense(initial, &DenseDrive::constant(&h), &dissipators, gamma, 0.0, t_sim, tol)?;
    let o = DenseOperator::new(n, observable.clone())?;
    let observable_sim = expectation(&end, &o)?;
    let target_state = evolve_lindblad_dense(initial, &DenseDrive::constant(&DenseOperator::new(n, h0.clone())?), &[], 0.0, 0.0, tau, tol)?;
    let observable_target = expectation(&target_state, &o)?;
    Ok(SwRecord { observable_sim, observable_target, abs_error: (observable_sim - observable_target).abs(), t_sim })
}
