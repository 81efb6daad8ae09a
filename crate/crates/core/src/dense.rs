//! Exact small-system reference: Jordan-Wigner embedding, density matrices,
//! channels and Lindblad evolution.
//!
//! Site 0 is the leftmost tensor factor (most significant bit of a basis
//! index). Majorana `2i` is `Z⊗…⊗Z⊗X_i` and `2i+1` is `Z⊗…⊗Z⊗Y_i`.
//! Lindblad dynamics run on the real coefficient vector r_P = Tr(Pρ) over
//! Pauli strings, where both the Hamiltonian part and the depolarizing
//! dissipators are sparse.

use crate::error::{invalid, Error, Result};
use crate::gaussian::{QuadraticHamiltonian, Waveform};
use crate::lattice::{Lattice, LocalOperator, LocalTerm, SupportSet};
use crate::linalg::{expm, hermiticity_defect, op_norm, CMat, I};
use crate::ode::{integrate, OdeOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DENSE_CAP: usize = 12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn check_cap(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(Error::TooLarge { n, cap: DENSE_CAP });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub n: usize,
    pub matrix: CMat,
}

impl DenseOperator {
    pub fn new(n: usize, matrix: CMat) -> Result<Self> {
        check_cap(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(DenseOperator { n, matrix })
    }

    pub fn is_hermitian(&self) -> bool {
        hermiticity_defect(&self.matrix) <= 1e-12 * self.matrix.iter().fold(1.0f64, |m, x| m.max(x.norm()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub rho: CMat,
}

impl DenseState {
    /// Computational basis state; `bits[s]` is the occupation of site s.
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let n = bits.len();
        check_cap(n)?;
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        let dim = 1usize << n;
        let mut rho = CMat::zeros(dim, dim);
        rho[(idx, idx)] = ONE;
        Ok(DenseState { n, rho })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::basis(&vec![0; n])
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// Trace 1, Hermitian and positive within the documented tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > 1e-10 {
            return Err(invalid("rho", format!("trace {tr} differs from 1")));
        }
        if hermiticity_defect(&self.rho) > 1e-10 {
            return Err(invalid("rho", "not Hermitian"));
        }
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min = herm.symmetric_eigenvalues().min();
        if min < -1e-8 {
            return Err(invalid("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

fn pauli(k: u8) -> CMat {
    match k {
        0 => CMat::identity(2, 2),
        1 => CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        _ => CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

pub fn sigma_x() -> CMat {
    pauli(1)
}
pub fn sigma_y() -> CMat {
    pauli(2)
}
pub fn sigma_z() -> CMat {
    pauli(3)
}

/// Tensor product of per-site factors, site 0 leftmost.
pub fn tensor(factors: &[CMat]) -> CMat {
    factors.iter().fold(CMat::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Majorana operator `j` on `n` modes.
pub fn majorana(n: usize, j: usize) -> CMat {
    let mode = j / 2;
    let factors: Vec<CMat> = (0..n)
        .map(|s| {
            if s < mode {
                pauli(3)
            } else if s == mode {
                pauli(if j.is_multiple_of(2) { 1 } else { 2 })
            } else {
                pauli(0)
            }
        })
        .collect();
    tensor(&factors)
}

/// Annihilation operator of mode `i`: Z-string ⊗ |0⟩⟨1|.
pub fn annihilation(n: usize, i: usize) -> CMat {
    let lower = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let factors: Vec<CMat> = (0..n)
        .map(|s| {
            if s < i {
                pauli(3)
            } else if s == i {
                lower.clone()
            } else {
                pauli(0)
            }
        })
        .collect();
    tensor(&factors)
}

pub fn number_operator(n: usize, i: usize) -> CMat {
    let f: Vec<CMat> = (0..n).map(|s| if s == i { CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE]) } else { pauli(0) }).collect();
    tensor(&f)
}

/// Σ_i n_i / N.
pub fn mean_occupation_operator(n: usize) -> DenseOperator {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    for i in 0..n {
        m += number_operator(n, i);
    }
    DenseOperator { n, matrix: m / Complex64::new(n as f64, 0.0) }
}

/// H = (i/4) Σ A_jk c_j c_k.
pub fn jordan_wigner_dense(h: &QuadraticHamiltonian) -> Result<DenseOperator> {
    let n = h.modes();
    check_cap(n)?;
    let c: Vec<CMat> = (0..2 * n).map(|j| majorana(n, j)).collect();
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    let a = h.matrix();
    for j in 0..2 * n {
        for k in 0..2 * n {
            if a[(j, k)] != 0.0 {
                out += &c[j] * &c[k] * (I * (0.25 * a[(j, k)]));
            }
        }
    }
    Ok(DenseOperator { n, matrix: out })
}

pub fn expectation(state: &DenseState, o: &DenseOperator) -> Result<f64> {
    if state.n != o.n {
        return Err(Error::DimensionMismatch { expected: state.n, found: o.n });
    }
    let v = (&o.matrix * &state.rho).trace();
    if v.im.abs() >= 1e-9 {
        return Err(invalid("O", format!("expectation has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

pub fn evolve_unitary(state: &DenseState, u: &CMat) -> DenseState {
    DenseState { n: state.n, rho: u * &state.rho * u.adjoint() }
}

/// A Pauli string: bit `n−1−s` of the masks refers to site s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: usize,
    pub z: usize,
}

impl PauliString {
    /// Index into the 4^n coefficient vector.
    fn index(self, n: usize) -> usize {
        (self.x << n) | self.z
    }

    fn from_index(k: usize, n: usize) -> Self {
        PauliString { x: k >> n, z: k & ((1 << n) - 1) }
    }

    /// P|b⟩ = phase(b)|b ⊕ x⟩.
    fn phase(self, b: usize) -> Complex64 {
        let y = (self.x & self.z).count_ones();
        let sign = if (b & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        i_pow(y) * sign
    }

    pub fn anticommutes(self, other: PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 1
    }

    pub fn weight_on(self, site: usize, n: usize) -> bool {
        let bit = 1 << (n - 1 - site);
        (self.x | self.z) & bit != 0
    }

    /// Majorana `j` on `n` modes as a Pauli string.
    pub fn majorana(n: usize, j: usize) -> Self {
        let mode = j / 2;
        let bit = 1usize << (n - 1 - mode);
        let lower: usize = (0..mode).map(|s| 1usize << (n - 1 - s)).sum();
        if j.is_multiple_of(2) {
            PauliString { x: bit, z: lower }
        } else {
            PauliString { x: bit, z: lower | bit }
        }
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// QP = ω R with R = Q·P up to phase.
fn product_phase(q: PauliString, p: PauliString) -> (PauliString, Complex64) {
    let r = PauliString { x: q.x ^ p.x, z: q.z ^ p.z };
    // compare on |0⟩: QP|0⟩ = ω R|0⟩
    let e = (p.x & p.z).count_ones() + (q.x & q.z).count_ones() + 4 - (r.x & r.z).count_ones() % 4;
    let sign = if (p.x & q.z).count_ones() % 2 == 1 { -ONE } else { ONE };
    (r, i_pow(e) * sign)
}

/// Real Pauli coefficients r_P = Tr(Pρ) (for Hermitian ρ).
pub fn pauli_coefficients(m: &CMat, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let mut out = vec![0.0; dim * dim];
    for (k, slot) in out.iter_mut().enumerate() {
        let p = PauliString::from_index(k, n);
        let mut acc = ZERO;
        for b in 0..dim {
            acc += p.phase(b) * m[(b, b ^ p.x)];
        }
        *slot = acc.re;
    }
    out
}

/// ⋆-norm of a dense operator under its Pauli-string decomposition: each
/// string P with coefficient c_P = Tr(PM)/2ⁿ is one term on its support.
/// The identity component touches no site and is ignored.
pub fn pauli_star_norm(m: &CMat, n: usize) -> f64 {
    let dim = 1usize << n;
    let mut per_site = vec![0.0; n];
    for k in 1..dim * dim {
        let p = PauliString::from_index(k, n);
        let mut acc = ZERO;
        for b in 0..dim {
            acc += p.phase(b) * m[(b, b ^ p.x)];
        }
        let c = acc.norm() / dim as f64;
        if c == 0.0 {
            continue;
        }
        for (s, slot) in per_site.iter_mut().enumerate() {
            if p.weight_on(s, n) {
                *slot += c;
            }
        }
    }
    per_site.into_iter().fold(0.0, f64::max)
}

/// Product of single-site factors, identity elsewhere.
pub fn site_operator(n: usize, factors: &[(usize, CMat)]) -> CMat {
    let f: Vec<CMat> = (0..n).map(|s| factors.iter().find(|(x, _)| *x == s).map(|(_, m)| m.clone()).unwrap_or_else(|| pauli(0))).collect();
    tensor(&f)
}

/// Inverse of [`pauli_coefficients`].
pub fn from_pauli_coefficients(r: &[f64], n: usize) -> CMat {
    let dim = 1usize << n;
    let mut m = CMat::zeros(dim, dim);
    let norm = 1.0 / dim as f64;
    for (k, &v) in r.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let p = PauliString::from_index(k, n);
        for b in 0..dim {
            m[(b ^ p.x, b)] += p.phase(b) * (v * norm);
        }
    }
    m
}

/// Dissipators used in the noise models. Each generator is D − id for a
/// depolarizing channel D, so exp(γt(D − id)) = (1−p)id + pD with p = 1−e^{−γt}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dissipator {
    /// Qubit depolarizing on a site: D(ρ) = Tr_s ρ ⊗ I/2.
    Qubit(usize),
    /// Fermionic mode replacement: D(ρ) = ¼(ρ + c_x ρ c_x + c_y ρ c_y + Pρ P).
    FermionMode(usize),
}

impl Dissipator {
    /// Whether the string P is annihilated by D (otherwise D fixes it).
    fn kills(self, p: PauliString, n: usize) -> bool {
        match self {
            Dissipator::Qubit(s) => p.weight_on(s, n),
            Dissipator::FermionMode(i) => p.anticommutes(PauliString::majorana(n, 2 * i)) || p.anticommutes(PauliString::majorana(n, 2 * i + 1)),
        }
    }

    fn site(self) -> usize {
        match self {
            Dissipator::Qubit(s) | Dissipator::FermionMode(s) => s,
        }
    }
}

fn conjugate_by_string(rho: &CMat, p: PauliString) -> CMat {
    let dim = rho.nrows();
    CMat::from_fn(dim, dim, |a, b| {
        let (a0, b0) = (a ^ p.x, b ^ p.x);
        p.phase(a0) * p.phase(b0).conj() * rho[(a0, b0)]
    })
}

/// Apply (1−p)ρ + p·D(ρ) for one dissipator.
pub fn apply_channel(state: &DenseState, d: Dissipator, p: f64) -> Result<DenseState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("probability {p} outside [0, 1]")));
    }
    let n = state.n;
    if d.site() >= n {
        return Err(Error::SiteOutOfRange { index: d.site(), sites: n });
    }
    let bit = 1usize << (n - 1 - d.site());
    let strings: [PauliString; 3] = match d {
        Dissipator::Qubit(_) => [PauliString { x: bit, z: 0 }, PauliString { x: bit, z: bit }, PauliString { x: 0, z: bit }],
        Dissipator::FermionMode(i) => {
            let cx = PauliString::majorana(n, 2 * i);
            let cy = PauliString::majorana(n, 2 * i + 1);
            [cx, cy, PauliString { x: cx.x ^ cy.x, z: cx.z ^ cy.z }]
        }
    };
    let mut mixed = state.rho.clone();
    for s in strings {
        mixed += conjugate_by_string(&state.rho, s);
    }
    let rho = &state.rho * Complex64::new(1.0 - p, 0.0) + mixed * Complex64::new(0.25 * p, 0.0);
    Ok(DenseState { n, rho })
}

/// Replace fermionic mode `i` by the maximally mixed mode with probability p.
/// For mode 0 this coincides with (1−p)ρ + p·Tr_0ρ ⊗ I/2; for later modes the
/// Jordan-Wigner strings make the qubit partial trace a different channel.
pub fn depolarize_mode_dense(state: &DenseState, i: usize, p: f64) -> Result<DenseState> {
    apply_channel(state, Dissipator::FermionMode(i), p)
}

/// (1−p)ρ + p·Tr_sρ ⊗ I/2.
pub fn depolarize_qubit_dense(state: &DenseState, s: usize, p: f64) -> Result<DenseState> {
    apply_channel(state, Dissipator::Qubit(s), p)
}

/// H(t) = Σ f_i(t) H_i with dense Hermitian generators.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDrive {
    pub n: usize,
    pub terms: Vec<(Waveform, CMat)>,
}

impl DenseDrive {
    pub fn constant(h: &DenseOperator) -> Self {
        DenseDrive { n: h.n, terms: vec![(Waveform::constant(1.0), h.matrix.clone())] }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(w, _)| w.is_constant())
    }

    pub fn matrix_at(&self, t: f64) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::zeros(dim, dim);
        for (w, h) in &self.terms {
            m += h * Complex64::new(w.eval(t), 0.0);
        }
        m
    }
}

/// Sparse real matrix in coordinate-by-column form.
#[derive(Debug, Clone, Default)]
struct Sparse {
    dim: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl Sparse {
    fn mul_add(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        for &(r, c, x) in &self.entries {
            out[r as usize] += scale * x * v[c as usize];
        }
    }

    fn col_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for &(_, c, x) in &self.entries {
            s[c as usize] += x.abs();
        }
        s
    }
}

/// Superoperator −i[H, ·] on Pauli coefficients.
fn commutator_generator(h: &CMat, n: usize) -> Sparse {
    let dim = 1usize << (2 * n);
    let hc = pauli_coefficients(h, n);
    let scale = 1.0 / (1usize << n) as f64;
    let terms: Vec<(PauliString, f64)> =
        hc.iter().enumerate().filter(|(_, v)| v.abs() > 1e-15).map(|(k, v)| (PauliString::from_index(k, n), v * scale)).collect();
    let mut entries = Vec::new();
    for col in 0..dim {
        let p = PauliString::from_index(col, n);
        for &(q, hq) in &terms {
            if q.anticommutes(p) {
                // −i[Q, P] = −2i QP = −2i ω R
                let (r, w) = product_phase(q, p);
                let v = (Complex64::new(0.0, -2.0) * w).re * hq;
                entries.push((r.index(n) as u32, col as u32, v));
            }
        }
    }
    Sparse { dim, entries }
}

fn dissipator_rates(dissipators: &[Dissipator], n: usize) -> Vec<f64> {
    let dim = 1usize << (2 * n);
    (0..dim)
        .map(|k| {
            let p = PauliString::from_index(k, n);
            dissipators.iter().filter(|d| d.kills(p, n)).count() as f64
        })
        .collect()
}

/// Integrate ρ̇ = −i[H(t), ρ] + γ Σ_d (D_d − id)(ρ) from t0 to t1.
pub fn evolve_lindblad_dense(state: &DenseState, drive: &DenseDrive, dissipators: &[Dissipator], gamma: f64, t0: f64, t1: f64, tol: f64) -> Result<DenseState> {
    let n = state.n;
    if drive.n != n {
        return Err(Error::DimensionMismatch { expected: n, found: drive.n });
    }
    if !(gamma >= 0.0) || !(tol > 0.0) {
        return Err(invalid("gamma/tol", "need gamma ≥ 0 and tol > 0"));
    }
    for d in dissipators {
        if d.site() >= n {
            return Err(Error::SiteOutOfRange { index: d.site(), sites: n });
        }
    }
    let t = t1 - t0;
    if t < 0.0 {
        return Err(Error::Integration { t: t0, reason: "t1 < t0".into() });
    }
    let active_noise = gamma > 0.0 && !dissipators.is_empty();
    if drive.is_constant() && !active_noise {
        let u = expm(&(drive.matrix_at(t0) * Complex64::new(0.0, -t)));
        return Ok(evolve_unitary(state, &u));
    }
    let rates: Vec<f64> = if active_noise { dissipator_rates(dissipators, n).iter().map(|r| -gamma * r).collect() } else { Vec::new() };
    let mut r = pauli_coefficients(&state.rho, n);
    if drive.is_constant() {
        let gen = commutator_generator(&drive.matrix_at(t0), n);
        expmv(&gen, &rates, t, &mut r, tol)?;
    } else {
        let gens: Vec<(Waveform, Sparse)> = drive.terms.iter().map(|(w, h)| (w.clone(), commutator_generator(h, n))).collect();
        let rhs = |time: f64, y: &[f64], dy: &mut [f64]| {
            dy.iter_mut().for_each(|x| *x = 0.0);
            for (w, g) in &gens {
                g.mul_add(y, w.eval(time), dy);
            }
            for (k, rate) in rates.iter().enumerate() {
                dy[k] += rate * y[k];
            }
        };
        let mut opts = OdeOptions::with_tol(tol);
        opts.atol = tol;
        integrate(rhs, t0, t1, &mut r, &opts)?;
    }
    Ok(DenseState { n, rho: from_pauli_coefficients(&r, n) })
}

/// v ← exp(t(G + diag(rates))) v by truncated Taylor series on sub-steps.
fn expmv(gen: &Sparse, rates: &[f64], t: f64, v: &mut [f64], tol: f64) -> Result<()> {
    let mut col = gen.col_abs_sums();
    for (k, r) in rates.iter().enumerate() {
        col[k] += r.abs();
    }
    let norm = col.iter().fold(0.0f64, |m, x| m.max(*x)) * t;
    const THETA: f64 = 4.0;
    let steps = (norm / THETA).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let dim = v.len();
    let mut term = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    let eps = tol.min(1e-14);
    for _ in 0..steps {
        term.copy_from_slice(v);
        let mut converged = false;
        for k in 1..200 {
            next.iter_mut().for_each(|x| *x = 0.0);
            gen.mul_add(&term, h / k as f64, &mut next);
            for (i, r) in rates.iter().enumerate() {
                next[i] += r * h / k as f64 * term[i];
            }
            std::mem::swap(&mut term, &mut next);
            let tn = term.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (vi, ti) in v.iter_mut().zip(&term) {
                *vi += ti;
            }
            let vn = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if tn <= eps * vn.max(1e-300) && k as f64 > h * norm / t {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Truncation("Taylor series for the Lindblad propagator did not converge".into()));
        }
    }
    Ok(())
}

/// Deterministic random LocalOperator satisfying the declared (a, Z, J).
/// Candidate `k` draws from its own ChaCha stream, so the result does not
/// depend on generation order.
pub fn random_local_operator(lattice: &Lattice, a: f64, z: f64, j: f64, seed: u64) -> Result<LocalOperator> {
    if !(a > 0.0 && z > 0.0 && j > 0.0) {
        return Err(invalid("a/Z/J", "parameters must be positive"));
    }
    let n = lattice.num_sites();
    let reach = a.floor() as usize;
    let mut accepted: Vec<LocalTerm> = Vec::new();
    let mut overlaps: Vec<usize> = Vec::new();
    for k in 0..(2 * n) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let x = rng.random_range(0..n);
        let mut sites = vec![x];
        if reach >= 1 && rng.random_bool(0.6) {
            let near: Vec<usize> = (0..n).filter(|&y| y != x && lattice.distance(x, y) <= reach).collect();
            if !near.is_empty() {
                sites.push(near[rng.random_range(0..near.len())]);
            }
        }
        let support = SupportSet::new(sites);
        let dim = 1usize << support.len();
        let m = CMat::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let target = j * rng.random_range(0.1..=1.0);
        let m = &m * Complex64::new(target / op_norm(&m), 0.0);
        let touching: Vec<usize> = (0..accepted.len()).filter(|&i| accepted[i].support().overlaps(&support)).collect();
        if touching.len() as f64 > z || touching.iter().any(|&i| (overlaps[i] + 1) as f64 > z) {
            continue;
        }
        for &i in &touching {
            overlaps[i] += 1;
        }
        overlaps.push(touching.len());
        accepted.push(LocalTerm::explicit(support, m)?);
    }
    let bounds = crate::lattice::LocalityBounds { a, z, j };
    LocalOperator::new(accepted).with_bounds(lattice, bounds)
}
