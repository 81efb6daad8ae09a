//! Trotter-Suzuki product formulas, even/odd splittings, noisy circuit
//! execution on covariance matrices and the local-observable error bound.
//!
//! Slots are 0-based internally; a formula applies its stages in list order.

use crate::dense::{apply_channel, jordan_wigner_dense, DenseState, Dissipator};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{depolarize_modes, mode_occupations, BlockQuadratic, CovarianceState, DepolSpec};
use crate::lattice::{nu_d, Lattice, LocalTerm};
use crate::linalg::{commutator, expm, max_abs, op_norm, CMat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFormula {
    pub stages: Vec<(usize, f64)>,
    pub order: usize,
    pub slots: usize,
}

impl ProductFormula {
    /// Σ of coefficients per slot (each should be 1).
    pub fn slot_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.slots];
        for &(r, x) in &self.stages {
            s[r] += x;
        }
        s
    }

    /// Stage list of the inverse map: reversed with negated coefficients.
    pub fn inverse(&self) -> ProductFormula {
        ProductFormula { stages: self.stages.iter().rev().map(|&(r, x)| (r, -x)).collect(), order: self.order, slots: self.slots }
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.stages.len();
        (0..n).all(|i| self.stages[i].0 == self.stages[n - 1 - i].0 && self.stages[i].1 == self.stages[n - 1 - i].1)
    }
}

fn merge(stages: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(stages.len());
    for (r, x) in stages {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += x,
            _ => out.push((r, x)),
        }
    }
    out
}

/// p = 1: sequential; p = 2: symmetric half steps; p = 2k: Suzuki's recursion
/// S_{2k}(ε) = S_{2k−2}(uε)² S_{2k−2}((1−4u)ε) S_{2k−2}(uε)², u = 1/(4 − 4^{1/(2k−1)}).
pub fn suzuki_formula(p: usize, k: usize) -> Result<ProductFormula> {
    if k < 2 {
        return Err(invalid("K", format!("need at least 2 slots, got {k}")));
    }
    let stages = match p {
        1 => (0..k).map(|r| (r, 1.0)).collect(),
        2 => s2(k),
        _ if p.is_multiple_of(2) => {
            let mut cur = s2(k);
            let mut order = 2;
            while order < p {
                let kk = (order + 2) / 2;
                let u = 1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * kk as f64 - 1.0)));
                let scaled = |c: f64| cur.iter().map(|&(r, x)| (r, x * c)).collect::<Vec<_>>();
                let mut next = Vec::new();
                for c in [u, u, 1.0 - 4.0 * u, u, u] {
                    next.extend(scaled(c));
                }
                cur = merge(next);
                order += 2;
            }
            cur
        }
        _ => return Err(invalid("p", format!("order {p} unsupported: use 1 or an even number"))),
    };
    Ok(ProductFormula { stages, order: p, slots: k })
}

fn s2(k: usize) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = (0..k).map(|r| (r, 0.5)).collect();
    v.extend((0..k).rev().map(|r| (r, 0.5)));
    merge(v)
}

/// Unitary of one formula step on dense slot Hamiltonians.
pub fn formula_unitary(f: &ProductFormula, slots: &[CMat], eps: f64) -> CMat {
    let dim = slots[0].nrows();
    let mut u = CMat::identity(dim, dim);
    for &(r, x) in &f.stages {
        u = expm(&(&slots[r] * Complex64::new(0.0, -x * eps))) * u;
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCertificate {
    pub certified_order: usize,
    pub slope: f64,
}

fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let n = op_norm(&h);
    h / Complex64::new(n, 0.0)
}

/// Least squares y = slope·x + b; returns (slope, intercept, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, my - slope * mx, r2)
}

/// Fit ‖S(ε) − exp(−iHε)‖ ∝ ε^{p+1} over one decade with random 8×8 slots.
pub fn verify_formula_order(f: &ProductFormula, trials: usize, seed: u64) -> Result<OrderCertificate> {
    if trials < 5 {
        return Err(invalid("trials", "need at least 5 trials"));
    }
    let eps_max = if f.order >= 6 { 0.5 } else { 0.2 };
    let eps: Vec<f64> = (0..9).map(|i| eps_max * 10f64.powf(-(i as f64) / 8.0)).collect();
    let mut slopes = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let slots: Vec<CMat> = (0..f.slots).map(|_| random_hermitian(8, &mut rng)).collect();
        let h = slots.iter().fold(CMat::zeros(8, 8), |acc, s| acc + s);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for &e in &eps {
            let exact = expm(&(&h * Complex64::new(0.0, -e)));
            let err = op_norm(&(formula_unitary(f, &slots, e) - exact));
            xs.push(e.ln());
            ys.push(err.ln());
        }
        let (slope, _, r2) = linear_fit(&xs, &ys);
        if r2 < 0.99 {
            return Err(Error::Inconclusive(format!("slope fit R² = {r2:.4} < 0.99 in trial {trial}")));
        }
        slopes.push(slope);
    }
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let certified = (slope.round() as i64 - 1).max(0) as usize;
    if certified < f.order {
        return Err(Error::Inconclusive(format!("measured order {certified} below declared order {}", f.order)));
    }
    Ok(OrderCertificate { certified_order: certified, slope })
}

/// Spin-model splitting: each slot holds mutually commuting terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSplit {
    pub slots: Vec<Vec<LocalTerm>>,
}

/// Nearest-neighbour bonds into 2·d slots: slot 2·axis + parity of the lower
/// coordinate along the bond axis.
pub fn even_odd_split(lattice: &Lattice, bonds: &[LocalTerm]) -> Result<SpinSplit> {
    let d = lattice.dim();
    let mut slots: Vec<Vec<LocalTerm>> = vec![Vec::new(); 2 * d];
    for t in bonds {
        let s = t.support().sites();
        if s.len() != 2 || lattice.distance(s[0], s[1]) != 1 {
            return Err(invalid("chain", format!("term on {s:?} is not a nearest-neighbour bond")));
        }
        let (c0, c1) = (lattice.coords(s[0]), lattice.coords(s[1]));
        let axis = (0..d).find(|&ax| c0[ax] != c1[ax]).expect("distinct sites differ on some axis");
        let lo = c0[axis].min(c1[axis]);
        // a periodic wrap bond joins extent−1 and 0
        let lo = if c0[axis].abs_diff(c1[axis]) > 1 { c0[axis].max(c1[axis]) } else { lo };
        slots[2 * axis + lo % 2].push(t.clone());
    }
    for slot in &slots {
        for (i, a) in slot.iter().enumerate() {
            for b in &slot[i + 1..] {
                if a.support().overlaps(b.support()) {
                    let commute = match (a.matrix(), b.matrix()) {
                        (Some(ma), Some(mb)) if a.support() == b.support() => max_abs(&commutator(ma, mb)) < 1e-12,
                        _ => false,
                    };
                    if !commute {
                        return Err(invalid("chain", "terms in one slot do not commute (odd periodic ring?)"));
                    }
                }
            }
        }
    }
    Ok(SpinSplit { slots })
}

/// Quadratic splitting: each slot is a set of disjoint bond blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSplit {
    pub n: usize,
    pub slots: Vec<BlockQuadratic>,
}

impl GaussianSplit {
    /// Modes touched by each slot.
    pub fn slot_modes(&self, r: usize) -> Vec<usize> {
        let mut m: Vec<usize> = self.slots[r].blocks.iter().flat_map(|(idx, _)| idx.iter().map(|j| j / 2)).collect();
        m.sort_unstable();
        m.dedup();
        m
    }
}

/// Bond blocks of the open chain h·μ + g·iQ: bond (i, i+1) carries the
/// hopping term plus h/deg(x)·n_x for each endpoint x, so every bond
/// Hamiltonian is local and the bonds sum to H.
pub fn fermion_chain_bonds(n: usize, h: f64, g: f64) -> Result<Vec<(usize, crate::linalg::RMat)>> {
    chain_bonds(n, h, g, false)
}

/// As [`fermion_chain_bonds`] on a ring: bond (N−1, 0) closes the chain and
/// every site has degree 2. Needs an even N so the even/odd split stays disjoint.
pub fn fermion_ring_bonds(n: usize, h: f64, g: f64) -> Result<Vec<(usize, crate::linalg::RMat)>> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(invalid("N", "a ring needs an even number of modes, at least 4"));
    }
    chain_bonds(n, h, g, true)
}

fn chain_bonds(n: usize, h: f64, g: f64, ring: bool) -> Result<Vec<(usize, crate::linalg::RMat)>> {
    if n < 2 {
        return Err(invalid("N", "need at least 2 modes"));
    }
    let deg = |x: usize| if !ring && (x == 0 || x == n - 1) { 1.0 } else { 2.0 };
    let bonds = if ring { n } else { n - 1 };
    Ok((0..bonds)
        .map(|i| {
            let mut b = crate::linalg::RMat::zeros(4, 4);
            b[(0, 1)] = h / deg(i);
            b[(1, 0)] = -h / deg(i);
            b[(2, 3)] = h / deg(i + 1);
            b[(3, 2)] = -h / deg(i + 1);
            b[(0, 2)] = 2.0 * g;
            b[(2, 0)] = -2.0 * g;
            (i, b)
        })
        .collect())
}

/// Even bonds (0,1),(2,3),… in slot 0 and odd bonds in slot 1. Bond N−1
/// (the ring closure, even N only) joins modes N−1 and 0.
pub fn even_odd_split_gaussian(n: usize, bonds: &[(usize, crate::linalg::RMat)]) -> Result<GaussianSplit> {
    let mut blocks: [Vec<(Vec<usize>, crate::linalg::RMat)>; 2] = [Vec::new(), Vec::new()];
    for (i, b) in bonds {
        let wrap = *i == n - 1 && n.is_multiple_of(2);
        if (i + 1 >= n && !wrap) || b.nrows() != 4 {
            return Err(invalid("chain", format!("bond {i} is not a nearest-neighbour 4×4 block")));
        }
        let j = (i + 1) % n;
        blocks[i % 2].push((vec![2 * i, 2 * i + 1, 2 * j, 2 * j + 1], b.clone()));
    }
    let [even, odd] = blocks;
    Ok(GaussianSplit { n, slots: vec![BlockQuadratic::new(n, even)?, BlockQuadratic::new(n, odd)?] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoisePlacement {
    /// Depolarize every mode after each stage.
    AllModes,
    /// Depolarize only modes touched by the stage's slot.
    TouchedModes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterRun {
    pub state: CovarianceState,
    pub observable: f64,
}

/// Apply S_p(τ/T)^T with optional depolarizing after every stage.
pub fn run_trotter(
    initial: &CovarianceState,
    split: &GaussianSplit,
    f: &ProductFormula,
    tau: f64,
    steps: usize,
    noise: Option<f64>,
    placement: NoisePlacement,
) -> Result<TrotterRun> {
    if steps == 0 {
        return Err(invalid("T", "need at least one step"));
    }
    if initial.modes() != split.n {
        return Err(Error::DimensionMismatch { expected: split.n, found: initial.modes() });
    }
    if f.slots != split.slots.len() {
        return Err(Error::DimensionMismatch { expected: split.slots.len(), found: f.slots });
    }
    let eps = tau / steps as f64;
    let rotations: Vec<_> = f.stages.iter().map(|&(r, x)| split.slots[r].rotation(x * eps)).collect();
    let noise_specs: Vec<Option<DepolSpec>> = f
        .stages
        .iter()
        .map(|&(r, _)| {
            noise.filter(|p| *p > 0.0).map(|p| match placement {
                NoisePlacement::AllModes => DepolSpec::all(split.n, p),
                NoisePlacement::TouchedModes => DepolSpec { modes: split.slot_modes(r), strength: p },
            })
        })
        .collect();
    let mut state = initial.clone();
    for _ in 0..steps {
        for (rot, spec) in rotations.iter().zip(&noise_specs) {
            rot.apply(&mut state)?;
            if let Some(spec) = spec {
                state = depolarize_modes(&state, spec)?;
            }
        }
    }
    let observable = mode_occupations(&state).mean;
    Ok(TrotterRun { state, observable })
}

/// The same gate and noise schedule on a dense density matrix.
pub fn replay_trotter_dense(
    initial: &DenseState,
    split: &GaussianSplit,
    f: &ProductFormula,
    tau: f64,
    steps: usize,
    noise: Option<f64>,
    placement: NoisePlacement,
) -> Result<DenseState> {
    let eps = tau / steps as f64;
    let slot_h: Vec<CMat> = split.slots.iter().map(|s| jordan_wigner_dense(&s.to_quadratic()).map(|d| d.matrix)).collect::<Result<_>>()?;
    let unitaries: Vec<CMat> = f.stages.iter().map(|&(r, x)| expm(&(&slot_h[r] * Complex64::new(0.0, -x * eps)))).collect();
    let mut state = initial.clone();
    for _ in 0..steps {
        for (u, &(r, _)) in unitaries.iter().zip(&f.stages) {
            state = crate::dense::evolve_unitary(&state, u);
            if let Some(p) = noise.filter(|p| *p > 0.0) {
                let modes = match placement {
                    NoisePlacement::AllModes => (0..split.n).collect(),
                    NoisePlacement::TouchedModes => split.slot_modes(r),
                };
                for m in modes {
                    state = apply_channel(&state, Dissipator::FermionMode(m), p)?;
                }
            }
        }
    }
    Ok(state)
}

/// Weak compositions of `total` into `parts` non-negative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// C^(p) = e^{−p}/(p+1)! Σ_{j=2}^{M} Σ_{n_1+…+n_{j−1}=p} (j−1)!/(Π n_i!)
/// |x_j| Π_{i<j} |x_i|^{n_i} (2p+2j−1)^{pd} e^{p−j+1}, summed by enumeration.
pub fn trotter_constant(f: &ProductFormula, p: usize, d: usize) -> f64 {
    let x: Vec<f64> = f.stages.iter().map(|s| s.1.abs()).collect();
    let m = x.len();
    let mut total = 0.0;
    for j in 2..=m {
        let mut inner = 0.0;
        for comp in compositions(p, j - 1) {
            let mut term = 1.0;
            for (i, &ni) in comp.iter().enumerate() {
                term *= x[i].powi(ni as i32) / factorial(ni);
            }
            inner += term;
        }
        total += factorial(j - 1) * inner * x[j - 1] * ((2 * p + 2 * j - 1) as f64).powi((p * d) as i32) * ((p as f64) - j as f64 + 1.0).exp();
    }
    (-(p as f64)).exp() / factorial(p + 1) * total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterBoundParams {
    pub p: usize,
    pub d: usize,
    pub x_size: usize,
    pub norm_o: f64,
    pub a0: f64,
    pub z: f64,
    pub c_lr: f64,
    pub tau: f64,
    pub steps: usize,
    pub c_p: f64,
}

/// a₀^{(d−1)(p−1)}/Z² · C^(p) |X|² ‖O‖ c_LR τ ν_d(c_LR τ) (c_LR ε)^p.
pub fn trotter_bound(b: &TrotterBoundParams) -> Result<f64> {
    if b.steps == 0 || !(b.tau >= 0.0) || !(b.c_lr > 0.0) || !(b.z > 0.0) || !(b.a0 > 0.0) || !(b.c_p >= 0.0) {
        return Err(invalid("params", "bound parameters must be positive"));
    }
    let eps = b.tau / b.steps as f64;
    let nu = nu_d(b.c_lr * b.tau, b.d, b.a0, 1e-12)?;
    let pre = b.a0.powi(((b.d - 1) * (b.p.max(1) - 1)) as i32) / (b.z * b.z);
    Ok(pre * b.c_p * (b.x_size * b.x_size) as f64 * b.norm_o * b.c_lr * b.tau * nu * (b.c_lr * eps).powi(b.p as i32))
}
