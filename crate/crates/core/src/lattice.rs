//! Lattice geometry, local-operator term lists, the intensive ⋆-norm and
//! Lieb-Robinson bound evaluators.
//!
//! Explicit term matrices live on the tensor factor of their support with the
//! sites in ascending order; the lowest site is the leftmost factor.

use crate::error::{invalid, Error, Result};
use crate::linalg::{op_norm, CMat};
use num_complex::Complex64;
use std::f64::consts::E;

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    extents: Vec<usize>,
    periodic: Vec<bool>,
}

impl Lattice {
    pub fn new(extents: Vec<usize>, periodic: Vec<bool>) -> Result<Self> {
        if extents.is_empty() {
            return Err(invalid("extents", "lattice dimension must be at least 1"));
        }
        if extents.len() != periodic.len() {
            return Err(Error::DimensionMismatch { expected: extents.len(), found: periodic.len() });
        }
        if extents.contains(&0) {
            return Err(invalid("extents", "every extent must be positive"));
        }
        Ok(Lattice { extents, periodic })
    }

    /// Open chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(vec![n], vec![false])
    }

    pub fn open(extents: Vec<usize>) -> Result<Self> {
        let d = extents.len();
        Self::new(extents, vec![false; d])
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn num_sites(&self) -> usize {
        self.extents.iter().product()
    }

    /// Coordinates of a linear index; axis 0 varies slowest.
    pub fn coords(&self, index: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        let mut r = index;
        for ax in (0..self.dim()).rev() {
            c[ax] = r % self.extents[ax];
            r /= self.extents[ax];
        }
        c
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.extents).fold(0, |acc, (c, e)| acc * e + c)
    }

    pub fn check_site(&self, index: usize) -> Result<()> {
        if index >= self.num_sites() {
            return Err(Error::SiteOutOfRange { index, sites: self.num_sites() });
        }
        Ok(())
    }

    /// Manhattan distance, wrapping on periodic axes.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let (cx, cy) = (self.coords(x), self.coords(y));
        (0..self.dim())
            .map(|ax| {
                let d = cx[ax].abs_diff(cy[ax]);
                if self.periodic[ax] {
                    d.min(self.extents[ax] - d)
                } else {
                    d
                }
            })
            .sum()
    }

    /// Nearest-neighbour bonds `(x, y)` with `x < y`.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.num_sites() {
            let c = self.coords(x);
            for ax in 0..self.dim() {
                let e = self.extents[ax];
                let next = if c[ax] + 1 < e {
                    Some(c[ax] + 1)
                } else if self.periodic[ax] && e > 2 {
                    Some(0)
                } else {
                    None
                };
                if let Some(n) = next {
                    let mut cn = c.clone();
                    cn[ax] = n;
                    let y = self.index(&cn);
                    out.push((x.min(y), x.max(y)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Sorted, de-duplicated set of site indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new(mut sites: Vec<usize>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        SupportSet(sites)
    }

    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn overlaps(&self, other: &SupportSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        SupportSet::new(self.0.iter().chain(&other.0).copied().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub distance: usize,
    pub diam_a: usize,
    pub diam_b: usize,
}

pub fn diameter(lattice: &Lattice, s: &SupportSet) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::EmptySupport);
    }
    for &x in s.sites() {
        lattice.check_site(x)?;
    }
    let mut d = 0;
    for (i, &x) in s.sites().iter().enumerate() {
        for &y in &s.sites()[i + 1..] {
            d = d.max(lattice.distance(x, y));
        }
    }
    Ok(d)
}

pub fn geometry(lattice: &Lattice, a: &SupportSet, b: &SupportSet) -> Result<Geometry> {
    let diam_a = diameter(lattice, a)?;
    let diam_b = diameter(lattice, b)?;
    let distance =
        a.sites().iter().flat_map(|&x| b.sites().iter().map(move |&y| (x, y))).map(|(x, y)| lattice.distance(x, y)).min().expect("both sets are non-empty");
    Ok(Geometry { distance, diam_a, diam_b })
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermPayload {
    Matrix(CMat),
    Norm,
}

/// One local term: a support plus either an explicit matrix or just its norm.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    support: SupportSet,
    payload: TermPayload,
    norm: f64,
}

impl LocalTerm {
    pub fn explicit(support: SupportSet, matrix: CMat) -> Result<Self> {
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let norm = op_norm(&matrix);
        Ok(LocalTerm { support, payload: TermPayload::Matrix(matrix), norm })
    }

    pub fn norm_only(support: SupportSet, norm: f64) -> Result<Self> {
        if !(norm >= 0.0) {
            return Err(invalid("norm", "term norms must be non-negative"));
        }
        Ok(LocalTerm { support, payload: TermPayload::Norm, norm })
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn matrix(&self) -> Option<&CMat> {
        match &self.payload {
            TermPayload::Matrix(m) => Some(m),
            TermPayload::Norm => None,
        }
    }
}

/// Declared geometric-locality constants (a, Z, J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalityBounds {
    pub a: f64,
    pub z: f64,
    pub j: f64,
}

/// A stored decomposition into local terms. The ⋆-norm depends on this
/// decomposition and is never re-derived from a dense matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalOperator {
    terms: Vec<LocalTerm>,
    bounds: Option<LocalityBounds>,
}

impl LocalOperator {
    pub fn new(terms: Vec<LocalTerm>) -> Self {
        LocalOperator { terms, bounds: None }
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn bounds(&self) -> Option<LocalityBounds> {
        self.bounds
    }

    /// Attach (a, Z, J) after checking them against the term list.
    pub fn with_bounds(mut self, lattice: &Lattice, bounds: LocalityBounds) -> Result<Self> {
        self.check_bounds(lattice, bounds)?;
        self.bounds = Some(bounds);
        Ok(self)
    }

    pub fn check_bounds(&self, lattice: &Lattice, b: LocalityBounds) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            let d = diameter(lattice, &t.support)? as f64;
            if d > b.a {
                return Err(invalid("a", format!("term {i} has diameter {d} > {}", b.a)));
            }
            if t.norm > b.j * (1.0 + 1e-12) {
                return Err(invalid("J", format!("term {i} has norm {} > {}", t.norm, b.j)));
            }
            let overlaps = self.terms.iter().enumerate().filter(|(k, s)| *k != i && s.support.overlaps(&t.support)).count();
            if overlaps as f64 > b.z {
                return Err(invalid("Z", format!("term {i} overlaps {overlaps} others > {}", b.z)));
            }
        }
        Ok(())
    }

    /// Concatenate the decompositions.
    pub fn add(&self, other: &LocalOperator) -> LocalOperator {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        LocalOperator::new(terms)
    }

    pub fn scaled(&self, c: f64) -> LocalOperator {
        let terms = self
            .terms
            .iter()
            .map(|t| LocalTerm {
                support: t.support.clone(),
                payload: match &t.payload {
                    TermPayload::Matrix(m) => TermPayload::Matrix(m * Complex64::new(c, 0.0)),
                    TermPayload::Norm => TermPayload::Norm,
                },
                norm: t.norm * c.abs(),
            })
            .collect();
        LocalOperator::new(terms)
    }

    /// Largest site index touched, plus one.
    pub fn site_span(&self) -> usize {
        self.terms.iter().flat_map(|t| t.support.sites().last()).map(|x| x + 1).max().unwrap_or(0)
    }

    /// Dense matrix on `n_sites` qubits (site 0 leftmost).
    pub fn to_dense(&self, n_sites: usize) -> Result<CMat> {
        let dim = 1usize << n_sites;
        let mut out = CMat::zeros(dim, dim);
        let all: Vec<usize> = (0..n_sites).collect();
        for t in &self.terms {
            let m = t.matrix().ok_or(Error::ExplicitMatricesRequired)?;
            out += embed(m, t.support.sites(), &all)?;
        }
        Ok(out)
    }

    /// Conjugate every term by a product of single-site unitaries
    /// (`unitaries[x]` acts on site x). Supports are unchanged.
    pub fn conjugate_single_site(&self, unitaries: &[CMat]) -> Result<LocalOperator> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let m = t.matrix().ok_or(Error::ExplicitMatricesRequired)?;
            let mut u = CMat::identity(1, 1);
            for &x in t.support.sites() {
                let ux = unitaries.get(x).ok_or(Error::SiteOutOfRange { index: x, sites: unitaries.len() })?;
                u = u.kronecker(ux);
            }
            terms.push(LocalTerm::explicit(t.support.clone(), &u * m * u.adjoint())?);
        }
        Ok(LocalOperator::new(terms))
    }

    /// Conjugate by a layer of gates with pairwise disjoint supports. Each term
    /// only sees the gates overlapping it; its support grows to their union.
    pub fn conjugate_gate_layer(&self, gates: &[(SupportSet, CMat)]) -> Result<LocalOperator> {
        for (i, (s, _)) in gates.iter().enumerate() {
            if gates[i + 1..].iter().any(|(o, _)| o.overlaps(s)) {
                return Err(invalid("gates", "gate supports must be disjoint"));
            }
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let m = t.matrix().ok_or(Error::ExplicitMatricesRequired)?;
            let touching: Vec<&(SupportSet, CMat)> = gates.iter().filter(|(s, _)| s.overlaps(&t.support)).collect();
            let support = touching.iter().fold(t.support.clone(), |acc, (s, _)| acc.union(s));
            let mut op = embed(m, t.support.sites(), support.sites())?;
            for (s, g) in touching {
                let ge = embed(g, s.sites(), support.sites())?;
                op = &ge * op * ge.adjoint();
            }
            terms.push(LocalTerm::explicit(support, op)?);
        }
        Ok(LocalOperator::new(terms))
    }
}

/// Embed an operator acting on `support` (ascending) into the tensor space of
/// `target` (ascending superset of `support`).
pub fn embed(m: &CMat, support: &[usize], target: &[usize]) -> Result<CMat> {
    let k = support.len();
    if m.nrows() != 1 << k {
        return Err(Error::DimensionMismatch { expected: 1 << k, found: m.nrows() });
    }
    let pos: Vec<usize> =
        support.iter().map(|s| target.iter().position(|t| t == s).ok_or(invalid("support", format!("site {s} missing from target")))).collect::<Result<_>>()?;
    let n = target.len();
    let dim = 1usize << n;
    // bit of target position q inside a full index (position 0 is most significant)
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let local = |idx: usize| pos.iter().fold(0usize, |acc, &q| (acc << 1) | bit(idx, q));
    let mask: usize = pos.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let lc = local(col);
        let rest = col & !mask;
        for lr in 0..(1usize << k) {
            let v = m[(lr, lc)];
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut row = rest;
            for (i, &q) in pos.iter().enumerate() {
                if (lr >> (k - 1 - i)) & 1 == 1 {
                    row |= 1 << (n - 1 - q);
                }
            }
            out[(row, col)] = v;
        }
    }
    Ok(out)
}

/// Intensive ⋆-norm: sup over sites of the summed norms of terms touching it.
pub fn star_norm(a: &LocalOperator) -> f64 {
    let span = a.site_span();
    let mut per_site = vec![0.0; span];
    for t in &a.terms {
        for &x in t.support.sites() {
            per_site[x] += t.norm;
        }
    }
    per_site.into_iter().fold(0.0, f64::max)
}

/// [A, B] as the list of [a, b] over overlapping term pairs, each on the union support.
pub fn commutator_local(a: &LocalOperator, b: &LocalOperator) -> Result<LocalOperator> {
    let mut terms = Vec::new();
    for ta in &a.terms {
        let ma = ta.matrix().ok_or(Error::ExplicitMatricesRequired)?;
        for tb in &b.terms {
            let mb = tb.matrix().ok_or(Error::ExplicitMatricesRequired)?;
            if !ta.support.overlaps(&tb.support) {
                continue;
            }
            let u = ta.support.union(&tb.support);
            let ea = embed(ma, ta.support.sites(), u.sites())?;
            let eb = embed(mb, tb.support.sites(), u.sites())?;
            terms.push(LocalTerm::explicit(u, &ea * &eb - &eb * &ea)?);
        }
    }
    Ok(LocalOperator::new(terms))
}

/// c_LR = 4 e J Z a.
pub fn lr_velocity(a: f64, z: f64, j: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("Z", z), ("J", j)] {
        if !(v > 0.0) {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    Ok(4.0 * E * j * z * a)
}

/// ν_d(x) = 2^{d+1} e/(d−1)! Σ_{n≥0} (n+d−1)^{d−1} f_x(n), with f_x(n) = 1 for
/// n ≤ x and exp((x−n)/a) beyond. The tail is cut once its geometric bound
/// drops below `tail_tol`.
pub fn nu_d(x: f64, d: usize, a: f64, tail_tol: f64) -> Result<f64> {
    if !(x >= 0.0) || d == 0 || !(a > 0.0) || !(tail_tol > 0.0) {
        return Err(invalid("nu_d", format!("need x ≥ 0, d ≥ 1, a > 0, tol > 0 (x={x}, d={d}, a={a})")));
    }
    let fact: f64 = (1..d).map(|k| k as f64).product();
    let pref = 2f64.powi(d as i32 + 1) * E / fact;
    let p = (d - 1) as i32;
    let w = |n: f64| (n + d as f64 - 1.0).powi(p);
    let n0 = x.floor() as u64;
    let mut sum = 0.0;
    for n in 0..=n0 {
        sum += w(n as f64);
    }
    let decay = (-1.0 / a).exp();
    let mut n = n0 + 1;
    loop {
        let nf = n as f64;
        let term = w(nf) * ((x - nf) / a).exp();
        // ratio of consecutive tail terms is non-increasing in n
        let ratio = if d == 1 { decay } else { ((nf + d as f64) / (nf + d as f64 - 1.0)).powi(p) * decay };
        if ratio < 1.0 && pref * term / (1.0 - ratio) < tail_tol {
            break;
        }
        sum += term;
        n += 1;
        if n > n0 + 100_000_000 {
            return Err(Error::Truncation(format!("ν_d tail did not fall below {tail_tol:e}")));
        }
    }
    Ok(pref * sum)
}

/// (e/Z)|X| ‖O‖ ‖K‖ exp((c_LR t − dist)/a).
#[allow(clippy::too_many_arguments)]
pub fn lr_observable_bound(x_size: usize, norm_o: f64, norm_k: f64, t: f64, dist: usize, a: f64, z: f64, c_lr: f64) -> f64 {
    (E / z) * x_size as f64 * norm_o * norm_k * ((c_lr * t - dist as f64) / a).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn sx() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    fn sy() -> CMat {
        CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }
    fn sz() -> CMat {
        CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    #[test]
    fn geometry_examples() {
        let chain = Lattice::chain(10).unwrap();
        let g = geometry(&chain, &SupportSet::new(vec![0]), &SupportSet::new(vec![3])).unwrap();
        assert_eq!(g.distance, 3);
        let g = geometry(&chain, &SupportSet::new(vec![5]), &SupportSet::new(vec![5])).unwrap();
        assert_eq!((g.distance, g.diam_a, g.diam_b), (0, 0, 0));
        let sq = Lattice::open(vec![4, 4]).unwrap();
        let b = sq.index(&[2, 3]);
        let g = geometry(&sq, &SupportSet::new(vec![0]), &SupportSet::new(vec![b])).unwrap();
        assert_eq!(g.distance, 5);
        assert_eq!(geometry(&chain, &SupportSet::new(vec![]), &SupportSet::new(vec![1])), Err(Error::EmptySupport));
    }

    #[test]
    fn periodic_wrap() {
        let ring = Lattice::new(vec![10], vec![true]).unwrap();
        assert_eq!(ring.distance(0, 9), 1);
        assert_eq!(ring.bonds().len(), 10);
        assert_eq!(Lattice::chain(10).unwrap().bonds().len(), 9);
    }

    #[test]
    fn distance_is_metric_on_5x5() {
        let l = Lattice::open(vec![5, 5]).unwrap();
        let n = l.num_sites();
        for x in 0..n {
            assert_eq!(l.distance(x, x), 0);
            for y in 0..n {
                assert_eq!(l.distance(x, y), l.distance(y, x));
                if x != y {
                    assert!(l.distance(x, y) > 0);
                }
                for z in 0..n {
                    assert!(l.distance(x, z) <= l.distance(x, y) + l.distance(y, z));
                }
            }
        }
    }

    #[test]
    fn star_norm_examples() {
        let one = LocalOperator::new(vec![LocalTerm::norm_only(SupportSet::new(vec![2]), 0.7).unwrap()]);
        assert_eq!(star_norm(&one), 0.7);
        let chain = LocalOperator::new((0..5).map(|x| LocalTerm::norm_only(SupportSet::new(vec![x, x + 1]), 1.0).unwrap()).collect());
        assert_eq!(star_norm(&chain), 2.0);
    }

    #[test]
    fn commutator_examples() {
        let a = LocalOperator::new(vec![LocalTerm::explicit(SupportSet::new(vec![0]), sx()).unwrap()]);
        let b = LocalOperator::new(vec![LocalTerm::explicit(SupportSet::new(vec![1]), sz()).unwrap()]);
        assert!(commutator_local(&a, &b).unwrap().terms().is_empty());
        let b0 = LocalOperator::new(vec![LocalTerm::explicit(SupportSet::new(vec![0]), sz()).unwrap()]);
        let r = commutator_local(&a, &b0).unwrap();
        assert_eq!(r.terms().len(), 1);
        let expected = sy() * c(0., -2.);
        assert!(max_abs(&(r.terms()[0].matrix().unwrap() - expected)) < 1e-15);
        let norm_only = LocalOperator::new(vec![LocalTerm::norm_only(SupportSet::new(vec![0]), 1.0).unwrap()]);
        assert_eq!(commutator_local(&a, &norm_only), Err(Error::ExplicitMatricesRequired));
    }

    #[test]
    fn embed_places_site_zero_leftmost() {
        let e = embed(&sz(), &[0], &[0, 1]).unwrap();
        let expected = sz().kronecker(&CMat::identity(2, 2));
        assert!(max_abs(&(e - expected)) < 1e-15);
        let xz = sx().kronecker(&sz());
        let e = embed(&xz, &[0, 2], &[0, 1, 2]).unwrap();
        let expected = sx().kronecker(&CMat::identity(2, 2)).kronecker(&sz());
        assert!(max_abs(&(e - expected)) < 1e-15);
    }

    #[test]
    fn term_norm_is_largest_singular_value() {
        let t = LocalTerm::explicit(SupportSet::new(vec![1, 2]), sx().kronecker(&sy()) * c(3.0, 0.0)).unwrap();
        assert!((t.norm() - 3.0).abs() < 1e-12);
        assert!(LocalTerm::explicit(SupportSet::new(vec![1]), sx().kronecker(&sy())).is_err());
    }

    #[test]
    fn declared_bounds_are_checked() {
        let l = Lattice::chain(6).unwrap();
        let op = LocalOperator::new((0..5).map(|x| LocalTerm::norm_only(SupportSet::new(vec![x, x + 1]), 0.5).unwrap()).collect());
        assert!(op.clone().with_bounds(&l, LocalityBounds { a: 1.0, z: 2.0, j: 0.5 }).is_ok());
        assert!(op.clone().with_bounds(&l, LocalityBounds { a: 1.0, z: 1.0, j: 0.5 }).is_err());
        assert!(op.with_bounds(&l, LocalityBounds { a: 1.0, z: 2.0, j: 0.4 }).is_err());
    }

    #[test]
    fn lr_velocity_values() {
        assert!((lr_velocity(1.0, 2.0, 1.0).unwrap() - 8.0 * E).abs() < 1e-12);
        assert!((lr_velocity(1.0, 2.0, 1.0).unwrap() - 21.746).abs() < 1e-3);
        assert!((lr_velocity(1.0, 1.0, 0.5).unwrap() - 2.0 * E).abs() < 1e-12);
        assert!(lr_velocity(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn nu_d_closed_form_at_zero() {
        // only n=0 lies inside the cone; the tail is Σ_{n≥1} e^{-n} = 1/(e−1)
        let v = nu_d(0.0, 1, 1.0, 1e-14).unwrap();
        let expected = 4.0 * E * (1.0 + 1.0 / (E - 1.0));
        assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn nu_d_two_dimensions_against_long_sum() {
        let x = 3.5;
        let direct: f64 = (0..4000)
            .map(|n| {
                let nf = n as f64;
                let f = if nf <= x { 1.0 } else { ((x - nf) / 2.0).exp() };
                (nf + 1.0) * f
            })
            .sum::<f64>()
            * 8.0
            * E;
        assert!((nu_d(x, 2, 2.0, 1e-12).unwrap() - direct).abs() < 1e-10);
    }

    #[test]
    fn lr_bound_examples() {
        assert!(lr_observable_bound(2, 1.0, 1.0, 0.0, 100_000, 1.0, 2.0, 8.0) < 1e-300);
        let base = lr_observable_bound(3, 0.5, 2.0, 0.0, 0, 1.0, 2.0, 8.0);
        assert!((base - E / 2.0 * 3.0).abs() < 1e-12);
        let t1 = lr_observable_bound(3, 0.5, 2.0, 0.3, 4, 1.5, 2.0, 8.0);
        let t2 = lr_observable_bound(3, 0.5, 2.0, 0.6, 4, 1.5, 2.0, 8.0);
        assert!((t2 / t1 - (8.0 * 0.3 / 1.5f64).exp()).abs() < 1e-10);
    }
}
