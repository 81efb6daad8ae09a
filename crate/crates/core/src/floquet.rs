//! Floquet-Magnus effective Hamiltonians.
//!
//! Two routes: nested-commutator Magnus terms at the level of quadratic
//! A-matrices (where [H_A, H_B] = i·H_{[A,B]}), and the generic operator
//! recursion for Ω^(q), G^(q) on dense matrices. Every coefficient function is
//! a trigonometric polynomial, so the recursion stores each time-dependent
//! operator as an exact Fourier series sampled on a uniform grid.

use crate::dense::{jordan_wigner_dense, sigma_x, sigma_z, site_operator, DenseDrive};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{
    build_quadratic, conjugate, drive_propagator, evolve_exact, evolve_noisy_ode, iq_matrix_with, mode_occupations, mu_matrix, vacuum_state, DepolSpec,
    GaussianDrive, QuadSpec, QuadraticHamiltonian, Waveform,
};
use crate::linalg::{commutator, expm, graded_commutator_series, matrix_power, op_norm, CMat, RMat, I};
use crate::ode::{integrate, OdeOptions};
use crate::quadrature::gauss_legendre;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Access to the scalar coefficient functions of a drive.
pub trait Coefficients {
    fn waveforms(&self) -> Vec<&Waveform>;
}

impl Coefficients for GaussianDrive {
    fn waveforms(&self) -> Vec<&Waveform> {
        self.terms().iter().map(|(w, _)| w).collect()
    }
}

impl Coefficients for DenseDrive {
    fn waveforms(&self) -> Vec<&Waveform> {
        self.terms.iter().map(|(w, _)| w).collect()
    }
}

/// A drive whose coefficients all repeat with period `uptau`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDrive<D> {
    drive: D,
    period: f64,
}

impl<D: Coefficients> PeriodicDrive<D> {
    pub fn new(drive: D, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(invalid("uptau", "period must be positive"));
        }
        for w in drive.waveforms() {
            for s in 0..16 {
                let t = period * (s as f64 / 16.0 + 0.013);
                let (a, b) = (w.eval(t), w.eval(t + period));
                if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                    return Err(invalid("drive", format!("coefficient not periodic in {period}: f({t}) = {a}, f(t+uptau) = {b}")));
                }
            }
        }
        Ok(PeriodicDrive { drive, period })
    }

    pub fn drive(&self) -> &D {
        &self.drive
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Highest harmonic of the fundamental 2π/uptau present in any coefficient.
    pub fn max_harmonic(&self) -> usize {
        let mut kmax = 0;
        for w in self.drive.waveforms() {
            if w.is_constant() {
                continue;
            }
            let ratio = (self.period / w.period).round() as usize;
            for &(k, a, b) in &w.harmonics {
                if a != 0.0 || b != 0.0 {
                    kmax = kmax.max(k as usize * ratio);
                }
            }
        }
        kmax
    }
}

impl PeriodicDrive<GaussianDrive> {
    /// Jordan-Wigner image of every generator.
    pub fn to_dense(&self) -> Result<PeriodicDrive<DenseDrive>> {
        let mut terms = Vec::new();
        for (w, a) in self.drive.terms() {
            let h = jordan_wigner_dense(&QuadraticHamiltonian::new(a.clone())?)?;
            terms.push((w.clone(), h.matrix));
        }
        PeriodicDrive::new(DenseDrive { n: self.drive.modes(), terms }, self.period)
    }
}

/// H(t) = h(t)μ + g(t)·iQ with h = h₀ + h₁cos(2πt/uptau), g = g₀ + g₁sin(2πt/uptau).
pub fn demo_drive(n: usize, h0: f64, h1: f64, g0: f64, g1: f64, uptau: f64, ring: bool) -> Result<PeriodicDrive<GaussianDrive>> {
    if n < 2 {
        return Err(invalid("N", "need at least two modes"));
    }
    let mu = QuadraticHamiltonian::new(mu_matrix(n))?.with_label("mu");
    let iq = QuadraticHamiltonian::new(iq_matrix_with(n, ring))?.with_label("iQ");
    let drive = GaussianDrive::new(vec![(Waveform::cosine(h0, h1, uptau), mu), (Waveform::sine(g0, g1, uptau), iq)])?;
    PeriodicDrive::new(drive, uptau)
}

/// Transverse-field Ising drive f(t)Σσˣ + g(t)Σσᶻσᶻ (open chain) with
/// f = h·uptau² + F₁cos(2πt/uptau), g = c·uptau² + G₁cos(4πt/uptau).
pub fn tfim_drive(n: usize, h: f64, c: f64, f1: f64, g1: f64, uptau: f64) -> Result<PeriodicDrive<DenseDrive>> {
    let (x, zz) = tfim_generators(n)?;
    let f = Waveform::cosine(h * uptau * uptau, f1, uptau);
    let g = Waveform { constant: c * uptau * uptau, period: uptau, harmonics: vec![(2, g1, 0.0)] };
    PeriodicDrive::new(DenseDrive { n, terms: vec![(f, x), (g, zz)] }, uptau)
}

/// (Σσˣ, Σσᶻσᶻ) on an open chain.
pub fn tfim_generators(n: usize) -> Result<(CMat, CMat)> {
    if n < 2 {
        return Err(invalid("N", "need at least two sites"));
    }
    let dim = 1usize << n;
    let mut x = CMat::zeros(dim, dim);
    let mut zz = CMat::zeros(dim, dim);
    for s in 0..n {
        x += site_operator(n, &[(s, sigma_x())]);
        if s + 1 < n {
            zz += site_operator(n, &[(s, sigma_z()), (s + 1, sigma_z())]);
        }
    }
    Ok((x, zz))
}

/// Magnus terms of a quadratic drive. `terms[q]` is V_F^(q) (independent of
/// uptau for coefficients of the form f(t/uptau)); `partial_sums[q]` is
/// H_F^(q) = Σ_{r≤q} uptau^r V_F^(r).
#[derive(Debug, Clone, PartialEq)]
pub struct FmExpansion {
    pub order: usize,
    pub period: f64,
    pub terms: Vec<QuadraticHamiltonian>,
    pub partial_sums: Vec<QuadraticHamiltonian>,
    /// Composite panel count at which the simplex integrals converged.
    pub panels: usize,
}

impl FmExpansion {
    pub fn effective(&self) -> &QuadraticHamiltonian {
        &self.partial_sums[self.order]
    }
}

const QUAD_ORDER: usize = 12;

/// ∫_{0≤s_k≤…≤s_1≤T} f_1(s_1)…f_k(s_k) by nested composite Gauss-Legendre.
fn simplex_integral(fs: &[&Waveform], upper: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let Some((first, rest)) = fs.split_first() else {
        return 1.0;
    };
    let h = upper / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = p as f64 * h;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            let s = lo + 0.5 * h * (x + 1.0);
            acc += 0.5 * h * w * first.eval(s) * simplex_integral(rest, s, panels, rule);
        }
    }
    acc
}

/// Simplex integrals for every ordered index tuple of length `depth`,
/// refined by panel doubling until consecutive values agree within `tol`.
fn simplex_table(ws: &[&Waveform], depth: usize, period: f64, tol: f64) -> Result<(Vec<f64>, usize)> {
    let m = ws.len();
    let count = m.pow(depth as u32);
    let rule = gauss_legendre(QUAD_ORDER);
    let eval = |panels: usize| -> Vec<f64> {
        (0..count)
            .map(|idx| {
                let fs: Vec<&Waveform> = (0..depth).map(|d| ws[(idx / m.pow((depth - 1 - d) as u32)) % m]).collect();
                simplex_integral(&fs, period, panels, &rule)
            })
            .collect()
    };
    let max_panels = if depth >= 3 { 16 } else { 64 };
    let mut panels = 1;
    let mut prev = eval(panels);
    while panels < max_panels {
        panels *= 2;
        let cur = eval(panels);
        let scale = period.powi(depth as i32);
        let diff = cur.iter().zip(&prev).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if diff <= tol * scale {
            return Ok((cur, panels));
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!("simplex integrals of depth {depth} did not reach {tol:e} with {panels} panels")))
}

/// V_F^(0..p) of a quadratic drive, p ≤ 2, as A-matrices.
pub fn magnus_effective_quadratic(drive: &PeriodicDrive<GaussianDrive>, p: usize, quad_tol: f64) -> Result<FmExpansion> {
    if p > 2 {
        return Err(invalid("p", "closed-form Magnus terms are available for p ≤ 2"));
    }
    if !(quad_tol > 0.0) {
        return Err(invalid("quad_tol", "must be positive"));
    }
    let t = drive.period();
    let gens: Vec<&RMat> = drive.drive().terms().iter().map(|(_, a)| a).collect();
    let ws: Vec<&Waveform> = drive.drive().terms().iter().map(|(w, _)| w).collect();
    let m = gens.len();
    let dim = gens[0].nrows();
    let mut terms = Vec::new();
    let mut panels = 1;

    let (i1, p1) = simplex_table(&ws, 1, t, quad_tol)?;
    panels = panels.max(p1);
    let mut v0 = RMat::zeros(dim, dim);
    for (i, a) in gens.iter().enumerate() {
        v0 += *a * (i1[i] / t);
    }
    terms.push(v0);

    if p >= 1 {
        let (i2, p2) = simplex_table(&ws, 2, t, quad_tol)?;
        panels = panels.max(p2);
        let mut v1 = RMat::zeros(dim, dim);
        for i in 0..m {
            for j in 0..m {
                let w = i2[i * m + j];
                if i != j && w != 0.0 {
                    v1 += commutator(gens[i], gens[j]) * (w / (2.0 * t * t));
                }
            }
        }
        terms.push(v1);
    }
    if p >= 2 {
        let (i3, p3) = simplex_table(&ws, 3, t, quad_tol)?;
        panels = panels.max(p3);
        let mut v2 = RMat::zeros(dim, dim);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let w = i3[(i * m + j) * m + k];
                    if w == 0.0 {
                        continue;
                    }
                    let nested = commutator(gens[i], &commutator(gens[j], gens[k])) + commutator(gens[k], &commutator(gens[j], gens[i]));
                    v2 += nested * (w / (6.0 * t * t * t));
                }
            }
        }
        terms.push(v2);
    }

    let terms: Vec<QuadraticHamiltonian> = terms.into_iter().map(QuadraticHamiltonian::new).collect::<Result<_>>()?;
    let mut partial_sums = Vec::new();
    let mut acc = QuadraticHamiltonian::zero(dim / 2);
    for (q, v) in terms.iter().enumerate() {
        acc = acc.plus(&v.scaled(t.powi(q as i32)))?;
        partial_sums.push(acc.clone());
    }
    Ok(FmExpansion { order: p, period: t, terms, partial_sums, panels })
}

/// Matrix-valued trigonometric polynomial Σ_k c_k e^{ikωt}.
#[derive(Debug, Clone)]
struct Fourier {
    omega: f64,
    coeffs: Vec<(i64, CMat)>,
}

impl Fourier {
    /// Interpolating series through samples at t_j = j·period/M.
    fn from_samples(samples: &[CMat], period: f64) -> Self {
        let m = samples.len();
        let kmax = ((m - 1) / 2) as i64;
        let (r, c) = samples[0].shape();
        let coeffs = (-kmax..=kmax)
            .map(|k| {
                let mut acc = CMat::zeros(r, c);
                for (j, s) in samples.iter().enumerate() {
                    let phase = Complex64::from_polar(1.0, -2.0 * PI * (k * j as i64) as f64 / m as f64);
                    acc += s * phase;
                }
                (k, acc / Complex64::new(m as f64, 0.0))
            })
            .collect();
        Fourier { omega: 2.0 * PI / period, coeffs }
    }

    fn eval(&self, t: f64) -> CMat {
        let (r, c) = self.coeffs[0].1.shape();
        let mut out = CMat::zeros(r, c);
        for (k, m) in &self.coeffs {
            out += m * Complex64::from_polar(1.0, *k as f64 * self.omega * t);
        }
        out
    }

    fn mean(&self) -> CMat {
        self.coeffs.iter().find(|(k, _)| *k == 0).map(|(_, m)| m.clone()).expect("k = 0 present")
    }

    /// t ↦ scale·∫₀ᵗ (X(s) − X̄) ds, again a trigonometric polynomial.
    fn zero_mean_integral(&self, scale: Complex64) -> Fourier {
        let (r, c) = self.coeffs[0].1.shape();
        let mut constant = CMat::zeros(r, c);
        let mut coeffs = Vec::new();
        for (k, m) in &self.coeffs {
            if *k == 0 {
                continue;
            }
            // ∫₀ᵗ e^{ikωs} ds = (e^{ikωt} − 1)/(ikω)
            let f = scale / (I * (*k as f64 * self.omega));
            coeffs.push((*k, m * f));
            constant -= m * f;
        }
        coeffs.push((0, constant));
        coeffs.sort_by_key(|(k, _)| *k);
        Fourier { omega: self.omega, coeffs }
    }
}

/// Positive compositions of `total` into `k` ordered parts.
fn positive_compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 || total < k {
        return Vec::new();
    }
    crate::product_formula::compositions(total - k, k).into_iter().map(|c| c.into_iter().map(|x| x + 1).collect()).collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Result of evaluating R^(p)(t).
#[derive(Debug, Clone)]
pub struct RemainderSample {
    pub matrix: CMat,
    /// Number of nested-commutator orders kept in each series.
    pub truncation_order: usize,
}

/// Output of the dense operator-level recursion.
#[derive(Debug, Clone)]
pub struct DenseFmExpansion {
    pub order: usize,
    pub period: f64,
    pub n: usize,
    /// V_F^(q) = Ḡ^(q)/uptau^q.
    pub terms: Vec<CMat>,
    /// H_F^(q) = Σ_{r≤q} Ḡ^(r).
    pub partial_sums: Vec<CMat>,
    drive: DenseDrive,
    g: Vec<Fourier>,
    /// omega[q-1] holds Ω^(q) for q = 1..=order+1.
    omega: Vec<Fourier>,
}

impl DenseFmExpansion {
    pub fn effective(&self) -> &CMat {
        &self.partial_sums[self.order]
    }

    pub fn hamiltonian(&self, t: f64) -> CMat {
        self.drive.matrix_at(t)
    }

    /// Ω^(q)(t), 1 ≤ q ≤ order+1.
    pub fn omega(&self, q: usize, t: f64) -> CMat {
        self.omega[q - 1].eval(t)
    }

    pub fn g(&self, q: usize, t: f64) -> CMat {
        self.g[q].eval(t)
    }

    /// Ω(t) = Σ_{q=1}^{p+1} Ω^(q)(t). The extra order p+1 is what removes the
    /// time dependence of G^(p) from the rotated frame.
    pub fn omega_total(&self, t: f64) -> CMat {
        let mut out = self.omega[0].eval(t);
        for o in &self.omega[1..] {
            out += o.eval(t);
        }
        out
    }

    fn omega_dot_total(&self, t: f64) -> CMat {
        let mut out = CMat::zeros(self.g[0].coeffs[0].1.nrows(), self.g[0].coeffs[0].1.ncols());
        for g in &self.g {
            out += (g.eval(t) - g.mean()) * (-I);
        }
        out
    }

    /// H̃(t) = e^{−Ω}He^{Ω} − i e^{−Ω}∂_t e^{Ω}, evaluated exactly; the
    /// derivative of the exponential comes from a 2×2 block exponential.
    pub fn transformed_hamiltonian(&self, t: f64) -> CMat {
        let om = self.omega_total(t);
        let dom = self.omega_dot_total(t);
        let d = om.nrows();
        let mut block = CMat::zeros(2 * d, 2 * d);
        block.view_mut((0, 0), (d, d)).copy_from(&om);
        block.view_mut((d, d), (d, d)).copy_from(&om);
        block.view_mut((0, d), (d, d)).copy_from(&dom);
        let e = expm(&block);
        let ep = e.view((0, 0), (d, d)).into_owned();
        let deriv = e.view((0, d), (d, d)).into_owned();
        let em = expm(&(-&om));
        &em * self.hamiltonian(t) * &ep - &em * deriv * I
    }

    /// R^(p)(t): the words of the rotated-frame series of total order ≥ p+1,
    /// k-sums cut at a geometric tail bound of 1e-12.
    pub fn remainder(&self, t: f64) -> Result<RemainderSample> {
        let p = self.order;
        let omegas: Vec<CMat> = self.omega.iter().map(|o| o.eval(t)).collect();
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let (mut r, mut kmax) = graded_commutator_series(&omegas, &self.hamiltonian(t), p + 1, 1, |k| Complex64::new(sign(k) / factorial(k), 0.0), 1e-12)?;
        for m in 1..=p + 1 {
            let g = &self.g[m - 1];
            let dom = (g.eval(t) - g.mean()) * (-I);
            let (part, k) = graded_commutator_series(&omegas, &dom, p + 2 - m, 1, |k| -I * (sign(k) / factorial(k + 1)), 1e-12)?;
            r += part;
            kmax = kmax.max(k);
        }
        Ok(RemainderSample { matrix: r, truncation_order: kmax })
    }

    /// ‖𝒯exp(−i∫H) − 𝒯exp(−i∫H̃)‖ over one period.
    pub fn stroboscopic_defect(&self, tol: f64) -> Result<f64> {
        let u = time_ordered_exponential(|t| self.hamiltonian(t), 0.0, self.period, tol)?;
        let v = time_ordered_exponential(|t| self.transformed_hamiltonian(t), 0.0, self.period, tol)?;
        Ok(op_norm(&(u - v)))
    }
}

/// 𝒯exp(−i∫_{t0}^{t1} H(s)ds) by adaptive Runge-Kutta on the unitary.
pub fn time_ordered_exponential<F: Fn(f64) -> CMat>(h: F, t0: f64, t1: f64, tol: f64) -> Result<CMat> {
    let d = h(t0).nrows();
    let mut y = vec![0.0; 2 * d * d];
    for k in 0..d {
        y[k * d + k] = 1.0;
    }
    let unpack = |y: &[f64]| CMat::from_fn(d, d, |r, c| Complex64::new(y[c * d + r], y[d * d + c * d + r]));
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let du = h(t) * unpack(y) * (-I);
        for c in 0..d {
            for r in 0..d {
                dy[c * d + r] = du[(r, c)].re;
                dy[d * d + c * d + r] = du[(r, c)].im;
            }
        }
    };
    let mut opts = OdeOptions::with_tol(tol);
    opts.atol = tol;
    integrate(rhs, t0, t1, &mut y, &opts)?;
    Ok(unpack(&y))
}

/// Generic recursion for Ω^(q)(t), G^(q)(t) and H_F^(p) on a grid of `grid`
/// points per period. The grid must resolve every harmonic of G^(p), i.e.
/// grid ≥ 2(p+1)K + 1 for drive harmonics up to K.
pub fn fm_recursion_dense(drive: &PeriodicDrive<DenseDrive>, p: usize, grid: usize) -> Result<DenseFmExpansion> {
    if p > 3 {
        return Err(invalid("p", "dense recursion supports p ≤ 3"));
    }
    let n = drive.drive().n;
    if n > crate::dense::DENSE_CAP {
        return Err(Error::TooLarge { n, cap: crate::dense::DENSE_CAP });
    }
    let kmax = drive.max_harmonic().max(1);
    let need = 2 * (p + 1) * kmax + 1;
    if grid < need {
        return Err(invalid("grid", format!("{grid} points cannot resolve harmonic {} of G^({p}); need ≥ {need}", (p + 1) * kmax)));
    }
    let period = drive.period();
    let times: Vec<f64> = (0..grid).map(|j| period * j as f64 / grid as f64).collect();
    let hs: Vec<CMat> = times.iter().map(|&t| drive.drive().matrix_at(t)).collect();

    let mut g_series: Vec<Fourier> = Vec::new();
    let mut omega_series: Vec<Fourier> = Vec::new();
    // per grid point: Ω^(q) and ∂_tΩ^(q) samples, index q-1
    let mut om_s: Vec<Vec<CMat>> = Vec::new();
    let mut dom_s: Vec<Vec<CMat>> = Vec::new();

    for q in 0..=p {
        let samples: Vec<CMat> = if q == 0 {
            hs.clone()
        } else {
            (0..grid)
                .map(|j| {
                    let om = |i: usize| &om_s[i - 1][j];
                    let mut acc = CMat::zeros(hs[0].nrows(), hs[0].ncols());
                    for k in 1..=q {
                        let coef = if k % 2 == 0 { 1.0 } else { -1.0 } / factorial(k);
                        for comp in positive_compositions(q, k) {
                            let mut x = hs[j].clone();
                            for &i in comp.iter().rev() {
                                x = commutator(om(i), &x);
                            }
                            acc += x * Complex64::new(coef, 0.0);
                        }
                    }
                    for m in 1..=q {
                        for k in 1..=(q + 1 - m) {
                            let coef = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 } / factorial(k + 1);
                            for comp in positive_compositions(q + 1 - m, k) {
                                let mut x = dom_s[m - 1][j].clone();
                                for &i in comp.iter().rev() {
                                    x = commutator(om(i), &x);
                                }
                                acc += x * (I * coef);
                            }
                        }
                    }
                    acc
                })
                .collect()
        };
        let g = Fourier::from_samples(&samples, period);
        let gbar = g.mean();
        let om = g.zero_mean_integral(-I);
        dom_s.push(samples.iter().map(|s| (s - &gbar) * (-I)).collect());
        om_s.push(times.iter().map(|&t| om.eval(t)).collect());
        g_series.push(g);
        omega_series.push(om);
    }

    let terms: Vec<CMat> = g_series.iter().enumerate().map(|(q, g)| g.mean() / Complex64::new(period.powi(q as i32), 0.0)).collect();
    let mut partial_sums = Vec::new();
    let mut acc = CMat::zeros(hs[0].nrows(), hs[0].ncols());
    for g in &g_series {
        acc += g.mean();
        partial_sums.push(acc.clone());
    }
    Ok(DenseFmExpansion { order: p, period, n, terms, partial_sums, drive: drive.drive().clone(), g: g_series, omega: omega_series })
}

/// Γ_0..Γ_p of the remainder recursion and the prefactor C_p.
#[derive(Debug, Clone, PartialEq)]
pub struct FmConstants {
    pub gammas: Vec<f64>,
    /// max_{q<p} Γ_q (Γ_0 when p = 0).
    pub gamma_tilde: f64,
    /// (Γ̃_p + 1)·e^{4pΓ̃_p}.
    pub c_p: f64,
}

pub fn fm_constants(star_norm_h: f64, p: usize) -> Result<FmConstants> {
    if !(star_norm_h > 0.0) {
        return Err(invalid("star_norm_H", "must be positive"));
    }
    let mut g = vec![star_norm_h];
    let prod = |g: &[f64], comp: &[usize]| comp.iter().map(|&i| g[i - 1]).product::<f64>();
    for q in 1..=p {
        let mut v = 0.0;
        for k in 1..=q {
            let c = 2f64.powi(k as i32) / factorial(k);
            for comp in positive_compositions(q, k) {
                v += c * prod(&g, &comp) * g[0];
            }
        }
        for m in 1..=q {
            for k in 1..=(q + 1 - m) {
                let c = 2f64.powi(k as i32 + 1) / factorial(k + 1);
                for comp in positive_compositions(q + 1 - m, k) {
                    v += c * prod(&g, &comp) * g[m - 1];
                }
            }
        }
        g.push(v);
    }
    let gamma_tilde = if p == 0 { g[0] } else { g[..p].iter().cloned().fold(0.0, f64::max) };
    let c_p = (gamma_tilde + 1.0) * (4.0 * p as f64 * gamma_tilde).exp();
    Ok(FmConstants { gammas: g, gamma_tilde, c_p })
}

/// Inputs of one Floquet grid point on the quadratic demo model.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetParams {
    pub n: usize,
    pub h0: f64,
    pub h1: f64,
    pub g0: f64,
    pub g1: f64,
    pub p: usize,
    pub tau: f64,
    pub uptau: f64,
    pub gamma: f64,
    pub tol: f64,
    pub ring: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetRecord {
    pub observable_sim: f64,
    pub observable_target: f64,
    pub abs_error: f64,
    /// Achieved stroboscopic simulation time.
    pub t_sim: f64,
    pub periods: u64,
    /// Target time actually realised, t_sim·uptau^p.
    pub tau_eff: f64,
}

/// Target Hamiltonian H_0 with H_F^(p) = uptau^p H_0 + O(uptau^{p+1}).
pub fn floquet_target(params: &FloquetParams) -> Result<QuadraticHamiltonian> {
    let n = params.n;
    match params.p {
        0 => {
            let mu = build_quadratic(n, QuadSpec::Mu)?;
            let iq = QuadraticHamiltonian::new(iq_matrix_with(n, params.ring))?;
            mu.scaled(params.h0).plus(&iq.scaled(params.g0))
        }
        1 => {
            let drive = demo_drive(n, params.h0, params.h1, params.g0, params.g1, params.uptau, params.ring)?;
            let fm = magnus_effective_quadratic(&drive, 1, 1e-13)?;
            let v0 = fm.terms[0].matrix().iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if v0 > 1e-10 {
                return Err(invalid("h0/g0", "first-order target needs a drive with vanishing average"));
            }
            Ok(fm.terms[1].clone())
        }
        _ => Err(invalid("p", "the demo model supports p ∈ {0, 1}")),
    }
}

/// Evolve the demo drive from the vacuum for round(τ/uptau^{p+1}) periods and
/// compare the mean occupation with exact evolution under H_0 for t_sim·uptau^p.
pub fn run_floquet(params: &FloquetParams) -> Result<FloquetRecord> {
    if !(params.tau > 0.0 && params.uptau > 0.0 && params.gamma >= 0.0 && params.tol > 0.0) {
        return Err(invalid("tau/uptau/gamma/tol", "need τ, uptau, tol > 0 and γ ≥ 0"));
    }
    let target_h = floquet_target(params)?;
    let drive = demo_drive(params.n, params.h0, params.h1, params.g0, params.g1, params.uptau, params.ring)?;
    let periods = (params.tau / params.uptau.powi(params.p as i32 + 1)).round().max(1.0) as u64;
    let t_sim = periods as f64 * params.uptau;
    let tau_eff = t_sim * params.uptau.powi(params.p as i32);

    let start = vacuum_state(params.n);
    let end = if params.gamma == 0.0 {
        let o = drive_propagator(drive.drive(), 0.0, params.uptau, params.tol)?;
        conjugate(&start, &matrix_power(&o, periods))?
    } else {
        let noise = DepolSpec::all(params.n, params.gamma);
        evolve_noisy_ode(&start, drive.drive(), &noise, 0.0, t_sim, params.tol)?
    };
    let observable_sim = mode_occupations(&end).mean;
    let observable_target = mode_occupations(&evolve_exact(&start, &target_h, tau_eff)?).mean;
    Ok(FloquetRecord { observable_sim, observable_target, abs_error: (observable_sim - observable_target).abs(), t_sim, periods, tau_eff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{antisymmetry_defect, hermiticity_defect};

    fn dense_of(a: &QuadraticHamiltonian) -> CMat {
        jordan_wigner_dense(a).unwrap().matrix
    }

    #[test]
    fn constant_drive_has_no_corrections() {
        let h = build_quadratic(3, QuadSpec::Linear { c1: 0.7, c2: -0.4 }).unwrap();
        let d = PeriodicDrive::new(GaussianDrive::constant(&h), 0.3).unwrap();
        let fm = magnus_effective_quadratic(&d, 2, 1e-12).unwrap();
        assert!(fm.terms[1].matrix().norm() < 1e-12);
        assert!(fm.terms[2].matrix().norm() < 1e-12);
        assert!((fm.effective().matrix() - h.matrix()).norm() < 1e-12);
    }

    #[test]
    fn first_order_demo_is_commutator() {
        let n = 4;
        for uptau in [0.1, 0.7] {
            let d = demo_drive(n, 0.0, 1.0, 0.0, 1.0, uptau, false).unwrap();
            let fm = magnus_effective_quadratic(&d, 1, 1e-13).unwrap();
            assert!(fm.terms[0].matrix().norm() < 1e-13);
            let comm = build_quadratic(n, QuadSpec::Commutator).unwrap();
            // closed form of the simplex integral for cos/sin: −1/(4π)
            let expect = comm.matrix() * (-1.0 / (4.0 * PI));
            assert!((fm.terms[1].matrix() - expect).norm() < 1e-11, "uptau = {uptau}");
        }
    }

    #[test]
    fn magnus_terms_are_antisymmetric() {
        let d = demo_drive(5, 1.0, 0.5, 1.0, 0.5, 0.4, false).unwrap();
        let fm = magnus_effective_quadratic(&d, 2, 1e-12).unwrap();
        for v in fm.terms.iter().chain(&fm.partial_sums) {
            assert!(antisymmetry_defect(v.matrix()) < 1e-13);
        }
    }

    #[test]
    fn dense_recursion_matches_magnus() {
        let d = demo_drive(3, 1.0, 0.5, 1.0, 0.5, 0.6, false).unwrap();
        let fm = magnus_effective_quadratic(&d, 2, 1e-13).unwrap();
        let dense = fm_recursion_dense(&d.to_dense().unwrap(), 2, 16).unwrap();
        for q in 0..=2 {
            let diff = op_norm(&(&dense.terms[q] - dense_of(&fm.terms[q])));
            assert!(diff < 1e-8, "order {q}: {diff:e}");
            assert!(hermiticity_defect(&dense.partial_sums[q]) < 1e-10);
        }
    }

    #[test]
    fn omega_vanishes_at_period_ends() {
        let d = demo_drive(3, 0.3, 1.0, -0.2, 0.8, 0.5, false).unwrap().to_dense().unwrap();
        let fm = fm_recursion_dense(&d, 2, 24).unwrap();
        for q in 1..=3 {
            assert!(op_norm(&fm.omega(q, 0.0)) < 1e-12);
            assert!(op_norm(&fm.omega(q, 0.5)) < 1e-12);
            assert!(hermiticity_defect(&(fm.omega(q, 0.17) * I)) < 1e-12, "Ω^({q}) anti-Hermitian");
        }
    }

    #[test]
    fn stroboscopic_identity() {
        let d = demo_drive(3, 1.0, 0.5, 1.0, 0.5, 0.5, false).unwrap().to_dense().unwrap();
        let fm = fm_recursion_dense(&d, 1, 16).unwrap();
        assert!(fm.stroboscopic_defect(1e-11).unwrap() < 1e-7);
    }

    #[test]
    fn remainder_series_matches_block_exponential() {
        let d = demo_drive(3, 1.0, 0.5, 1.0, 0.5, 0.3, false).unwrap().to_dense().unwrap();
        let fm = fm_recursion_dense(&d, 2, 24).unwrap();
        for t in [0.05, 0.11, 0.2] {
            let r = fm.remainder(t).unwrap();
            let direct = fm.transformed_hamiltonian(t) - fm.effective();
            assert!(op_norm(&(&r.matrix - direct)) < 1e-11);
            assert!(r.truncation_order > 0);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let d = demo_drive(2, 1.0, 0.5, 1.0, 0.5, 0.5, false).unwrap().to_dense().unwrap();
        assert!(fm_recursion_dense(&d, 2, 6).is_err());
    }

    #[test]
    fn non_periodic_drive_rejected() {
        let h = build_quadratic(2, QuadSpec::Mu).unwrap();
        let g = GaussianDrive::new(vec![(Waveform::cosine(0.0, 1.0, 0.3), h)]).unwrap();
        assert!(PeriodicDrive::new(g, 0.5).is_err());
    }

    #[test]
    fn constants_recursion() {
        let c = fm_constants(0.8, 0).unwrap();
        assert_eq!(c.gammas, vec![0.8]);
        assert!((c.c_p - 1.8).abs() < 1e-15);
        // q = 1: (2/1!)Γ₀·Γ₀ + (2²/2!)Γ₀·Γ₀
        let c = fm_constants(0.8, 1).unwrap();
        assert!((c.gammas[1] - 4.0 * 0.64).abs() < 1e-14);
        assert!((c.c_p - 1.8 * (3.2f64).exp()).abs() < 1e-12);
        let c2 = fm_constants(0.8, 2).unwrap();
        assert!(c2.gammas[2] > c2.gammas[1]);
        assert!((c2.gamma_tilde - c2.gammas[1]).abs() < 1e-15);
    }

    #[test]
    fn p0_target_is_static_part() {
        let params = FloquetParams { n: 4, h0: 1.0, h1: 0.5, g0: 1.0, g1: 0.5, p: 0, tau: 1.5, uptau: 0.3, gamma: 0.0, tol: 1e-11, ring: false };
        let t = floquet_target(&params).unwrap();
        let d = demo_drive(4, 1.0, 0.5, 1.0, 0.5, 0.3, false).unwrap();
        let fm = magnus_effective_quadratic(&d, 0, 1e-13).unwrap();
        assert!((t.matrix() - fm.terms[0].matrix()).norm() < 1e-12);
    }

    #[test]
    fn run_floquet_converges_with_period() {
        let base = FloquetParams { n: 6, h0: 1.0, h1: 0.5, g0: 1.0, g1: 0.5, p: 0, tau: 1.5, uptau: 0.3, gamma: 0.0, tol: 1e-11, ring: false };
        let coarse = run_floquet(&base).unwrap();
        let fine = run_floquet(&FloquetParams { uptau: 0.075, ..base.clone() }).unwrap();
        assert_eq!(coarse.periods, 5);
        assert!(fine.abs_error < coarse.abs_error);
        assert!((coarse.abs_error - (coarse.observable_sim - coarse.observable_target).abs()).abs() == 0.0);
    }

    #[test]
    fn noisy_run_matches_noiseless_at_zero_rate_limit() {
        let base = FloquetParams { n: 4, h0: 0.0, h1: 1.0, g0: 0.0, g1: 1.0, p: 1, tau: 1.0, uptau: 0.25, gamma: 0.0, tol: 1e-11, ring: false };
        let a = run_floquet(&base).unwrap();
        let b = run_floquet(&FloquetParams { gamma: 1e-12, ..base }).unwrap();
        assert!((a.observable_sim - b.observable_sim).abs() < 1e-8);
        assert_eq!(a.periods, 16);
    }

    /// Nested midpoint rule over the 3-simplex on [0, 1].
    fn simplex3(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, h: impl Fn(f64) -> f64, n: usize) -> f64 {
        let dx = 1.0 / n as f64;
        let mut acc = 0.0;
        let mut inner2 = vec![0.0; n + 1];
        let mut inner1 = vec![0.0; n + 1];
        // inner1[j] = ∫₀^{x_j} h, inner2[j] = ∫₀^{x_j} g·inner1
        for j in 0..n {
            let x = (j as f64 + 0.5) * dx;
            inner1[j + 1] = inner1[j] + h(x) * dx;
            let mid1 = 0.5 * (inner1[j] + inner1[j + 1]);
            inner2[j + 1] = inner2[j] + g(x) * mid1 * dx;
            acc += f(x) * 0.5 * (inner2[j] + inner2[j + 1]) * dx;
        }
        acc
    }

    #[test]
    fn tfim_second_order_mechanism() {
        let w = 2.0 * PI;
        let (c1, c2) = (|s: f64| (w * s).cos(), |s: f64| (2.0 * w * s).cos());
        // surviving V^(2) words carry F₁²G₁; kernel of [X,[X,ZZ]] = 8(ZZ − YY)
        let kappa = -(simplex3(c1, c1, c2, 4000) - 2.0 * simplex3(c1, c2, c1, 4000) + simplex3(c2, c1, c1, 4000)) / 6.0;
        assert!((8.0 * kappa - 1.0 / (4.0 * PI * PI)).abs() < 1e-6);
        let jy_per = -1.0 / (4.0 * PI * PI);
        let n = 4;
        let (h, c, f1, g1) = (0.8, 0.3, 1.1, 0.9);
        let (x, zz) = tfim_generators(n).unwrap();
        let mut yy = CMat::zeros(16, 16);
        for s in 0..n - 1 {
            yy += site_operator(n, &[(s, crate::dense::sigma_y()), (s + 1, crate::dense::sigma_y())]);
        }
        let jy = jy_per * f1 * f1 * g1;
        let target = &x * Complex64::new(h, 0.0) + &zz * Complex64::new(c - jy, 0.0) + &yy * Complex64::new(jy, 0.0);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for uptau in [0.2, 0.1, 0.05] {
            let fm = fm_recursion_dense(&tfim_drive(n, h, c, f1, g1, uptau).unwrap(), 2, 16).unwrap();
            let diff = op_norm(&(fm.effective() - &target * Complex64::new(uptau * uptau, 0.0)));
            xs.push(f64::ln(uptau));
            ys.push(diff.ln());
        }
        let slope = crate::product_formula::linear_fit(&xs, &ys).0;
        assert!(slope >= 2.7, "slope {slope}");
    }

    #[test]
    fn remainder_scales_and_obeys_constant_bound() {
        let n = 4;
        for p in 0..=2usize {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for uptau in [0.1, 0.05, 0.025] {
                let d = demo_drive(n, 1.0, 0.5, 1.0, 0.5, uptau, false).unwrap().to_dense().unwrap();
                let fm = fm_recursion_dense(&d, p, 16).unwrap();
                let ts: Vec<f64> = (0..8).map(|j| uptau * (j as f64 + 0.5) / 8.0).collect();
                let r = ts.iter().map(|&t| crate::dense::pauli_star_norm(&fm.remainder(t).unwrap().matrix, n)).fold(0.0, f64::max);
                let h = ts.iter().map(|&t| crate::dense::pauli_star_norm(&fm.hamiltonian(t), n)).fold(0.0, f64::max);
                let c = fm_constants(h, p).unwrap();
                assert!(r <= c.c_p * uptau.powi(p as i32 + 1), "p={p} uptau={uptau}: {r:e}");
                xs.push(f64::ln(uptau));
                ys.push(r.ln());
            }
            let slope = crate::product_formula::linear_fit(&xs, &ys).0;
            assert!(slope >= p as f64 + 1.0 - 0.3, "p={p}: slope {slope}");
        }
    }
}
