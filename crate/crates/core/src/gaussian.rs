//! Free-fermion dynamics on Majorana second-moment matrices.
//!
//! Conventions: mode `i` owns Majoranas `2i = a + a†` and `2i+1 = −i(a − a†)`;
//! `H = (i/4) Σ A_jk c_j c_k`; `Γ_jk = (i/2) Tr(ρ [c_j, c_k])`. Then
//! `n_i = (1 + Γ_{2i,2i+1})/2` and `Γ(t) = e^{At} Γ e^{Aᵀt}`. Both signs are
//! pinned by the dense Jordan-Wigner cross-checks in the test suite.

use crate::error::{invalid, Error, Result};
use crate::linalg::{antisymmetrize, expm, matrix_power, RMat};
use crate::ode::{integrate, integrate_projected, OdeOptions};
use std::f64::consts::PI;

/// Sign `s` in `O = exp(s·A·t)`.
pub const EVOLUTION_SIGN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    n: usize,
    a: RMat,
    pub label: Option<String>,
}

impl QuadraticHamiltonian {
    pub fn new(a: RMat) -> Result<Self> {
        if a.nrows() != a.ncols() || !a.nrows().is_multiple_of(2) {
            return Err(invalid("A", format!("need a square 2N×2N matrix, got {}×{}", a.nrows(), a.ncols())));
        }
        let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if crate::linalg::antisymmetry_defect(&a) > 1e-12 * scale {
            return Err(invalid("A", "matrix is not antisymmetric"));
        }
        Ok(QuadraticHamiltonian { n: a.nrows() / 2, a, label: None })
    }

    pub fn zero(n: usize) -> Self {
        QuadraticHamiltonian { n, a: RMat::zeros(2 * n, 2 * n), label: None }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RMat {
        &self.a
    }

    pub fn scaled(&self, c: f64) -> Self {
        QuadraticHamiltonian { n: self.n, a: &self.a * c, label: None }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        check_modes(self.n, other.n)?;
        Ok(QuadraticHamiltonian { n: self.n, a: &self.a + &other.a, label: None })
    }
}

/// Which quadratic operator to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadSpec {
    /// μ = Σ a†a
    Mu,
    /// iQ with Q = Σ_i (a_i + a_i†)(a_{i+1} + a_{i+1}†) on an open chain
    IQ,
    /// c₁·μ + c₂·iQ
    Linear { c1: f64, c2: f64 },
    /// The A-matrix commutator [A_μ, A_iQ]; it represents the Hermitian
    /// operator [μ, Q] = −i[μ, iQ].
    Commutator,
}

pub fn mu_matrix(n: usize) -> RMat {
    let mut a = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(2 * i, 2 * i + 1)] = 1.0;
        a[(2 * i + 1, 2 * i)] = -1.0;
    }
    a
}

pub fn iq_matrix(n: usize) -> RMat {
    iq_matrix_with(n, false)
}

/// iQ on an open chain or, with `ring`, including the bond (N−1, 0).
pub fn iq_matrix_with(n: usize, ring: bool) -> RMat {
    let mut a = RMat::zeros(2 * n, 2 * n);
    let bonds = if ring && n > 2 { n } else { n.saturating_sub(1) };
    for i in 0..bonds {
        let j = (i + 1) % n;
        a[(2 * i, 2 * j)] += 2.0;
        a[(2 * j, 2 * i)] -= 2.0;
    }
    a
}

pub fn build_quadratic(n: usize, spec: QuadSpec) -> Result<QuadraticHamiltonian> {
    if n < 2 {
        return Err(invalid("N", format!("need at least 2 modes, got {n}")));
    }
    let (a, label) = match spec {
        QuadSpec::Mu => (mu_matrix(n), "mu"),
        QuadSpec::IQ => (iq_matrix(n), "iQ"),
        QuadSpec::Linear { c1, c2 } => (mu_matrix(n) * c1 + iq_matrix(n) * c2, "linear"),
        QuadSpec::Commutator => {
            let (m, q) = (mu_matrix(n), iq_matrix(n));
            (&m * &q - &q * &m, "[mu,Q]")
        }
    };
    Ok(QuadraticHamiltonian { n, a, label: Some(label.to_string()) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    gamma: RMat,
}

impl CovarianceState {
    pub fn new(gamma: RMat) -> Result<Self> {
        if gamma.nrows() != gamma.ncols() || !gamma.nrows().is_multiple_of(2) {
            return Err(invalid("Gamma", "need a square 2N×2N matrix"));
        }
        if crate::linalg::antisymmetry_defect(&gamma) > 1e-10 {
            return Err(invalid("Gamma", "matrix is not antisymmetric"));
        }
        Ok(CovarianceState { gamma })
    }

    pub fn modes(&self) -> usize {
        self.gamma.nrows() / 2
    }

    pub fn matrix(&self) -> &RMat {
        &self.gamma
    }

    /// Largest singular value; at most 1 for physical states.
    pub fn max_singular_value(&self) -> f64 {
        crate::linalg::op_norm_real(&self.gamma)
    }
}

pub fn vacuum_state(n: usize) -> CovarianceState {
    let mut g = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        g[(2 * i, 2 * i + 1)] = -1.0;
        g[(2 * i + 1, 2 * i)] = 1.0;
    }
    CovarianceState { gamma: g }
}

/// Vacuum with every mode particle-hole conjugated (c_{2i+1} → −c_{2i+1}).
pub fn fully_occupied_state(n: usize) -> CovarianceState {
    CovarianceState { gamma: -vacuum_state(n).gamma }
}

fn check_modes(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Orthogonal propagator exp(s·A·t).
pub fn propagator(h: &QuadraticHamiltonian, t: f64) -> RMat {
    expm(&(h.matrix() * (EVOLUTION_SIGN * t)))
}

pub fn conjugate(state: &CovarianceState, o: &RMat) -> Result<CovarianceState> {
    check_modes(state.gamma.nrows(), o.nrows())?;
    let mut g = o * &state.gamma * o.transpose();
    antisymmetrize(&mut g);
    Ok(CovarianceState { gamma: g })
}

pub fn evolve_exact(state: &CovarianceState, h: &QuadraticHamiltonian, t: f64) -> Result<CovarianceState> {
    check_modes(state.modes(), h.modes())?;
    if t == 0.0 {
        return Ok(state.clone());
    }
    conjugate(state, &propagator(h, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Occupations {
    pub per_mode: Vec<f64>,
    pub mean: f64,
}

pub fn mode_occupations(state: &CovarianceState) -> Occupations {
    let n = state.modes();
    let per_mode: Vec<f64> = (0..n).map(|i| 0.5 * (1.0 + state.gamma[(2 * i, 2 * i + 1)])).collect();
    let mean = if n == 0 { 0.0 } else { per_mode.iter().sum::<f64>() / n as f64 };
    Occupations { per_mode, mean }
}

/// Depolarizing noise on a set of modes: a probability per application or a
/// rate per unit time.
#[derive(Debug, Clone, PartialEq)]
pub struct DepolSpec {
    pub modes: Vec<usize>,
    pub strength: f64,
}

impl DepolSpec {
    pub fn all(n: usize, strength: f64) -> Self {
        DepolSpec { modes: (0..n).collect(), strength }
    }
}

fn noisy_mask(n: usize, modes: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &m in modes {
        if m >= n {
            return Err(Error::SiteOutOfRange { index: m, sites: n });
        }
        mask[m] = true;
    }
    Ok(mask)
}

/// Number of distinct noisy modes touched by the index pair (j, k).
fn touch_count(mask: &[bool], j: usize, k: usize) -> u32 {
    let (mj, mk) = (j / 2, k / 2);
    let mut c = mask[mj] as u32;
    if mk != mj {
        c += mask[mk] as u32;
    }
    c
}

/// Replace each listed mode by the maximally mixed mode with probability p.
/// On second moments this scales every entry by (1−p) per listed mode touched.
pub fn depolarize_modes(state: &CovarianceState, spec: &DepolSpec) -> Result<CovarianceState> {
    let p = spec.strength;
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("depolarizing probability {p} outside [0, 1]")));
    }
    let n = state.modes();
    let mask = noisy_mask(n, &spec.modes)?;
    let mut g = state.gamma.clone();
    if p == 0.0 {
        return Ok(CovarianceState { gamma: g });
    }
    let f = [1.0, 1.0 - p, (1.0 - p) * (1.0 - p)];
    for k in 0..2 * n {
        for j in 0..2 * n {
            let c = touch_count(&mask, j, k);
            if c > 0 {
                g[(j, k)] *= f[c as usize];
            }
        }
    }
    Ok(CovarianceState { gamma: g })
}

/// Scalar waveform c₀ + Σ_k (a_k cos(kωt) + b_k sin(kωt)), ω = 2π/period.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub constant: f64,
    pub period: f64,
    /// (harmonic k, cosine amplitude, sine amplitude)
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl Waveform {
    pub fn constant(c: f64) -> Self {
        Waveform { constant: c, period: 1.0, harmonics: Vec::new() }
    }

    pub fn cosine(constant: f64, amplitude: f64, period: f64) -> Self {
        Waveform { constant, period, harmonics: vec![(1, amplitude, 0.0)] }
    }

    pub fn sine(constant: f64, amplitude: f64, period: f64) -> Self {
        Waveform { constant, period, harmonics: vec![(1, 0.0, amplitude)] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let w = 2.0 * PI / self.period;
        self.constant + self.harmonics.iter().map(|&(k, a, b)| a * (k as f64 * w * t).cos() + b * (k as f64 * w * t).sin()).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.iter().all(|&(_, a, b)| a == 0.0 && b == 0.0)
    }

    /// Period-average (exact).
    pub fn mean(&self) -> f64 {
        self.constant
    }
}

/// H(t) = Σ f_i(t) H_i over fixed quadratic generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDrive {
    n: usize,
    terms: Vec<(Waveform, RMat)>,
}

impl GaussianDrive {
    pub fn new(terms: Vec<(Waveform, QuadraticHamiltonian)>) -> Result<Self> {
        let n = terms.first().map(|(_, h)| h.modes()).ok_or(invalid("drive", "needs at least one term"))?;
        for (_, h) in &terms {
            check_modes(n, h.modes())?;
        }
        Ok(GaussianDrive { n, terms: terms.into_iter().map(|(w, h)| (w, h.a)).collect() })
    }

    pub fn constant(h: &QuadraticHamiltonian) -> Self {
        GaussianDrive { n: h.modes(), terms: vec![(Waveform::constant(1.0), h.a.clone())] }
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Waveform, RMat)] {
        &self.terms
    }

    pub fn matrix_at(&self, t: f64) -> RMat {
        let mut a = RMat::zeros(2 * self.n, 2 * self.n);
        for (w, m) in &self.terms {
            a += m * w.eval(t);
        }
        a
    }
}

fn dep_weights(n: usize, modes: &[usize]) -> Result<RMat> {
    let mask = noisy_mask(n, modes)?;
    Ok(RMat::from_fn(2 * n, 2 * n, |j, k| touch_count(&mask, j, k) as f64))
}

/// Integrate dΓ/dt = AΓ − ΓA − γ·Dep(Γ), Dep scaling each entry by the number
/// of distinct noisy modes its indices touch.
pub fn evolve_noisy_ode(state: &CovarianceState, drive: &GaussianDrive, noise: &DepolSpec, t0: f64, t1: f64, tol: f64) -> Result<CovarianceState> {
    check_modes(state.modes(), drive.modes())?;
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let gamma = noise.strength;
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", "noise rate must be non-negative"));
    }
    let dim = 2 * drive.modes();
    let w = dep_weights(drive.modes(), &noise.modes)? * (gamma * EVOLUTION_SIGN.abs());
    let mut y: Vec<f64> = state.gamma.as_slice().to_vec();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let g = RMat::from_column_slice(dim, dim, y);
        let a = drive.matrix_at(t) * EVOLUTION_SIGN;
        let mut d = &a * &g - &g * &a;
        d -= w.component_mul(&g);
        dy.copy_from_slice(d.as_slice());
    };
    let project = |y: &mut [f64]| {
        for k in 0..dim {
            y[k * dim + k] = 0.0;
            for j in (k + 1)..dim {
                let v = 0.5 * (y[k * dim + j] - y[j * dim + k]);
                y[k * dim + j] = v;
                y[j * dim + k] = -v;
            }
        }
    };
    integrate_projected(rhs, project, t0, t1, &mut y, &OdeOptions::with_tol(tol))?;
    Ok(CovarianceState { gamma: RMat::from_column_slice(dim, dim, &y) })
}

/// Orthogonal map O with Γ(t1) = O Γ(t0) Oᵀ for the noiseless drive.
pub fn drive_propagator(drive: &GaussianDrive, t0: f64, t1: f64, tol: f64) -> Result<RMat> {
    let dim = 2 * drive.modes();
    if drive.terms.iter().all(|(w, _)| w.is_constant()) {
        return Ok(expm(&(drive.matrix_at(t0) * (EVOLUTION_SIGN * (t1 - t0)))));
    }
    let mut y: Vec<f64> = RMat::identity(dim, dim).as_slice().to_vec();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let o = RMat::from_column_slice(dim, dim, y);
        let d = drive.matrix_at(t) * EVOLUTION_SIGN * o;
        dy.copy_from_slice(d.as_slice());
    };
    integrate(rhs, t0, t1, &mut y, &OdeOptions::with_tol(tol))?;
    Ok(RMat::from_column_slice(dim, dim, &y))
}

/// Linear map on column-major vec(Γ) for one interval of the noisy dynamics.
pub fn noisy_superoperator(drive: &GaussianDrive, noise: &DepolSpec, t0: f64, t1: f64, tol: f64) -> Result<RMat> {
    let dim = 2 * drive.modes();
    let sdim = dim * dim;
    let w = dep_weights(drive.modes(), &noise.modes)? * noise.strength;
    let id = RMat::identity(dim, dim);
    let generators: Vec<(Waveform, RMat)> = drive
        .terms
        .iter()
        .map(|(wf, a)| {
            let a = a * EVOLUTION_SIGN;
            // vec(AΓ − ΓA) = (I ⊗ A − Aᵀ ⊗ I) vec(Γ) in column-major order
            (wf.clone(), id.kronecker(&a) - a.transpose().kronecker(&id))
        })
        .collect();
    let dep = RMat::from_diagonal(&nalgebra::DVector::from_column_slice(w.as_slice()));
    let mut y: Vec<f64> = RMat::identity(sdim, sdim).as_slice().to_vec();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let s = RMat::from_column_slice(sdim, sdim, y);
        let mut l = -&dep;
        for (wf, g) in &generators {
            l += g * wf.eval(t);
        }
        dy.copy_from_slice((l * s).as_slice());
    };
    integrate(rhs, t0, t1, &mut y, &OdeOptions::with_tol(tol))?;
    Ok(RMat::from_column_slice(sdim, sdim, &y))
}

/// Apply `map^k` to a state, where `map` acts on column-major vec(Γ).
pub fn apply_superoperator_power(state: &CovarianceState, map: &RMat, k: u64) -> Result<CovarianceState> {
    let dim = state.gamma.nrows();
    check_modes(dim * dim, map.nrows())?;
    let v = nalgebra::DVector::from_column_slice(state.gamma.as_slice());
    let out = matrix_power(map, k) * v;
    let mut g = RMat::from_column_slice(dim, dim, out.as_slice());
    antisymmetrize(&mut g);
    Ok(CovarianceState { gamma: g })
}

/// A quadratic generator made of blocks on pairwise disjoint Majorana index
/// sets, so its exponential is applied block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockQuadratic {
    pub n: usize,
    pub blocks: Vec<(Vec<usize>, RMat)>,
}

impl BlockQuadratic {
    pub fn new(n: usize, blocks: Vec<(Vec<usize>, RMat)>) -> Result<Self> {
        let mut seen = vec![false; 2 * n];
        for (idx, m) in &blocks {
            if m.nrows() != idx.len() || m.ncols() != idx.len() {
                return Err(Error::DimensionMismatch { expected: idx.len(), found: m.nrows() });
            }
            for &i in idx {
                if i >= 2 * n {
                    return Err(Error::SiteOutOfRange { index: i, sites: 2 * n });
                }
                if seen[i] {
                    return Err(invalid("blocks", "block index sets must be disjoint"));
                }
                seen[i] = true;
            }
        }
        Ok(BlockQuadratic { n, blocks })
    }

    pub fn to_quadratic(&self) -> QuadraticHamiltonian {
        let mut a = RMat::zeros(2 * self.n, 2 * self.n);
        for (idx, m) in &self.blocks {
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    a[(i, j)] += m[(p, q)];
                }
            }
        }
        QuadraticHamiltonian { n: self.n, a, label: None }
    }

    /// Block rotations exp(s·A_block·t).
    pub fn rotation(&self, t: f64) -> BlockRotation {
        BlockRotation { n: self.n, blocks: self.blocks.iter().map(|(idx, m)| (idx.clone(), expm(&(m * (EVOLUTION_SIGN * t))))).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRotation {
    n: usize,
    blocks: Vec<(Vec<usize>, RMat)>,
}

impl BlockRotation {
    /// Γ ← O Γ Oᵀ touching only the rows and columns of each block.
    pub fn apply(&self, state: &mut CovarianceState) -> Result<()> {
        check_modes(2 * self.n, state.gamma.nrows())?;
        let g = &mut state.gamma;
        let dim = g.nrows();
        for (idx, o) in &self.blocks {
            let k = idx.len();
            // rows
            let mut rows = RMat::zeros(k, dim);
            for (p, &i) in idx.iter().enumerate() {
                rows.set_row(p, &g.row(i));
            }
            let rows = o * rows;
            for (p, &i) in idx.iter().enumerate() {
                g.set_row(i, &rows.row(p));
            }
            // columns
            let mut cols = RMat::zeros(dim, k);
            for (p, &i) in idx.iter().enumerate() {
                cols.set_column(p, &g.column(i));
            }
            let cols = cols * o.transpose();
            for (p, &i) in idx.iter().enumerate() {
                g.set_column(i, &cols.column(p));
            }
        }
        Ok(())
    }

    /// Dense orthogonal matrix of the rotation.
    pub fn to_dense(&self) -> RMat {
        let mut o = RMat::identity(2 * self.n, 2 * self.n);
        for (idx, b) in &self.blocks {
            for (p, &i) in idx.iter().enumerate() {
                for (q, &j) in idx.iter().enumerate() {
                    o[(i, j)] = b[(p, q)];
                }
            }
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use proptest::prelude::*;

    fn chain_h(n: usize) -> QuadraticHamiltonian {
        build_quadratic(n, QuadSpec::Linear { c1: 1.0, c2: 0.5 }).unwrap()
    }

    #[test]
    fn vacuum_and_full_occupations() {
        assert_eq!(mode_occupations(&vacuum_state(1)).per_mode, vec![0.0]);
        let v = mode_occupations(&vacuum_state(4));
        assert_eq!(v.per_mode, vec![0.0; 4]);
        assert_eq!(v.mean, 0.0);
        assert_eq!(mode_occupations(&fully_occupied_state(4)).per_mode, vec![1.0; 4]);
        assert_eq!(crate::linalg::antisymmetry_defect(vacuum_state(5).matrix()), 0.0);
    }

    #[test]
    fn mu_is_block_diagonal() {
        let h = build_quadratic(4, QuadSpec::Mu).unwrap();
        for j in 0..8 {
            for k in 0..8 {
                if j / 2 != k / 2 {
                    assert_eq!(h.matrix()[(j, k)], 0.0);
                }
            }
        }
        let z = build_quadratic(4, QuadSpec::Linear { c1: 0.0, c2: 0.0 }).unwrap();
        assert_eq!(max_abs(z.matrix()), 0.0);
        assert!(build_quadratic(1, QuadSpec::Mu).is_err());
    }

    #[test]
    fn number_conserving_evolution_keeps_vacuum() {
        let mu = build_quadratic(3, QuadSpec::Mu).unwrap();
        let s = evolve_exact(&vacuum_state(3), &mu, 2.3).unwrap();
        assert!(max_abs(&(s.matrix() - vacuum_state(3).matrix())) < 1e-14);
    }

    #[test]
    fn exact_evolution_identities() {
        let h = chain_h(4);
        let s0 = vacuum_state(4);
        assert_eq!(evolve_exact(&s0, &h, 0.0).unwrap(), s0);
        assert!(max_abs(&(evolve_exact(&s0, &QuadraticHamiltonian::zero(4), 1.0).unwrap().matrix() - s0.matrix())) < 1e-15);
        let a = evolve_exact(&evolve_exact(&s0, &h, 0.4).unwrap(), &h, 0.7).unwrap();
        let b = evolve_exact(&s0, &h, 1.1).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
        let o = propagator(&h, 1.3);
        assert!(max_abs(&(o.transpose() * &o - RMat::identity(8, 8))) < 1e-12);
        assert!(evolve_exact(&vacuum_state(3), &h, 1.0).is_err());
    }

    #[test]
    fn depolarizing_limits() {
        let s = evolve_exact(&vacuum_state(3), &chain_h(3), 0.8).unwrap();
        assert_eq!(depolarize_modes(&s, &DepolSpec::all(3, 0.0)).unwrap(), s);
        let full = depolarize_modes(&s, &DepolSpec::all(3, 1.0)).unwrap();
        assert_eq!(max_abs(full.matrix()), 0.0);
        assert_eq!(mode_occupations(&full).per_mode, vec![0.5; 3]);
        assert!(depolarize_modes(&s, &DepolSpec::all(3, 1.5)).is_err());
        let one = depolarize_modes(&s, &DepolSpec { modes: vec![0], strength: 0.1 }).unwrap();
        assert!((one.matrix()[(0, 3)] - 0.9 * s.matrix()[(0, 3)]).abs() < 1e-15);
        assert_eq!(one.matrix()[(2, 5)], s.matrix()[(2, 5)]);
        let both = depolarize_modes(&s, &DepolSpec::all(3, 0.1)).unwrap();
        assert!((both.matrix()[(0, 3)] - 0.81 * s.matrix()[(0, 3)]).abs() < 1e-15);
        assert!((both.matrix()[(0, 1)] - 0.9 * s.matrix()[(0, 1)]).abs() < 1e-15);
    }

    #[test]
    fn noiseless_ode_matches_exact() {
        let h = chain_h(4);
        let s0 = vacuum_state(4);
        let tol = 1e-11;
        let ode = evolve_noisy_ode(&s0, &GaussianDrive::constant(&h), &DepolSpec::all(4, 0.0), 0.0, 1.0, tol).unwrap();
        let exact = evolve_exact(&s0, &h, 1.0).unwrap();
        assert!(max_abs(&(ode.matrix() - exact.matrix())) < 10.0 * tol);
    }

    #[test]
    fn pure_decay_relaxes_monotonically_to_half() {
        let s = fully_occupied_state(3);
        let zero = GaussianDrive::constant(&QuadraticHamiltonian::zero(3));
        let mut last = 1.0;
        for k in 1..6 {
            let t = k as f64;
            let out = evolve_noisy_ode(&s, &zero, &DepolSpec::all(3, 0.3), 0.0, t, 1e-10).unwrap();
            let n = mode_occupations(&out).mean;
            assert!(n < last && n > 0.5);
            assert!((n - (0.5 + 0.5 * (-0.3 * t).exp())).abs() < 1e-9);
            last = n;
        }
    }

    #[test]
    fn continuous_noise_matches_discrete_channel_without_dynamics() {
        let s = evolve_exact(&vacuum_state(3), &chain_h(3), 0.9).unwrap();
        let zero = GaussianDrive::constant(&QuadraticHamiltonian::zero(3));
        let (g, t) = (0.2, 0.7);
        let cont = evolve_noisy_ode(&s, &zero, &DepolSpec::all(3, g), 0.0, t, 1e-12).unwrap();
        let disc = depolarize_modes(&s, &DepolSpec::all(3, 1.0 - (-g * t).exp())).unwrap();
        assert!(max_abs(&(cont.matrix() - disc.matrix())) < 1e-10);
    }

    #[test]
    fn periodic_propagators_agree_with_direct_integration() {
        let n = 3;
        let period = 0.3;
        let drive = GaussianDrive::new(vec![
            (Waveform::cosine(1.0, 0.5, period), build_quadratic(n, QuadSpec::Mu).unwrap()),
            (Waveform::sine(1.0, 0.5, period), build_quadratic(n, QuadSpec::IQ).unwrap()),
        ])
        .unwrap();
        let s0 = vacuum_state(n);
        let direct = evolve_noisy_ode(&s0, &drive, &DepolSpec::all(n, 0.0), 0.0, 4.0 * period, 1e-12).unwrap();
        let o = drive_propagator(&drive, 0.0, period, 1e-12).unwrap();
        let via = conjugate(&s0, &matrix_power(&o, 4)).unwrap();
        assert!(max_abs(&(direct.matrix() - via.matrix())) < 1e-9);

        let noise = DepolSpec::all(n, 0.05);
        let direct = evolve_noisy_ode(&s0, &drive, &noise, 0.0, 5.0 * period, 1e-12).unwrap();
        let map = noisy_superoperator(&drive, &noise, 0.0, period, 1e-12).unwrap();
        let via = apply_superoperator_power(&s0, &map, 5).unwrap();
        assert!(max_abs(&(direct.matrix() - via.matrix())) < 1e-9);
    }

    #[test]
    fn block_rotation_matches_dense_conjugation() {
        let n = 3;
        let mut b = RMat::zeros(4, 4);
        b[(0, 1)] = 0.7;
        b[(1, 0)] = -0.7;
        b[(0, 2)] = 1.1;
        b[(2, 0)] = -1.1;
        b[(2, 3)] = 0.3;
        b[(3, 2)] = -0.3;
        let bq = BlockQuadratic::new(n, vec![(vec![0, 1, 2, 3], b), (vec![4, 5], RMat::from_row_slice(2, 2, &[0.0, 0.4, -0.4, 0.0]))]).unwrap();
        let s0 = evolve_exact(&vacuum_state(n), &chain_h(n), 0.5).unwrap();
        let mut s = s0.clone();
        bq.rotation(0.8).apply(&mut s).unwrap();
        let reference = evolve_exact(&s0, &bq.to_quadratic(), 0.8).unwrap();
        assert!(max_abs(&(s.matrix() - reference.matrix())) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn exact_evolution_preserves_singular_values(t in -3.0f64..3.0, h in -2.0f64..2.0, g in -2.0f64..2.0) {
            let hq = build_quadratic(4, QuadSpec::Linear { c1: h, c2: g }).unwrap();
            let s0 = depolarize_modes(&vacuum_state(4), &DepolSpec { modes: vec![1], strength: 0.3 }).unwrap();
            let s = evolve_exact(&s0, &hq, t).unwrap();
            let sv0 = {let mut v: Vec<f64> = s0.matrix().clone().singular_values().iter().copied().collect(); v.sort_by(f64::total_cmp); v};
            let sv1 = {let mut v: Vec<f64> = s.matrix().clone().singular_values().iter().copied().collect(); v.sort_by(f64::total_cmp); v};
            for (a, b) in sv0.iter().zip(&sv1) { prop_assert!((a - b).abs() < 1e-9); }
            prop_assert!(crate::linalg::antisymmetry_defect(s.matrix()) < 1e-12);
        }

        #[test]
        fn depolarizing_is_linear_contraction(p in 0.0f64..1.0, t in 0.0f64..2.0, c in -2.0f64..2.0) {
            let s = evolve_exact(&vacuum_state(3), &chain_h(3), t).unwrap();
            let spec = DepolSpec { modes: vec![0, 2], strength: p };
            let d = depolarize_modes(&s, &spec).unwrap();
            prop_assert!(d.max_singular_value() <= s.max_singular_value() + 1e-12);
            let scaled = CovarianceState::new(s.matrix() * c).unwrap();
            let lhs = depolarize_modes(&scaled, &spec).unwrap();
            prop_assert!(max_abs(&(lhs.matrix() - d.matrix() * c)) < 1e-12);
        }
    }
}
