//! Dense matrix helpers: matrix exponential, norms, commutators, Kronecker products.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 4] = [1.495585217958292e-2, 2.539_398_330_063_23e-1, 9.504178996162932e-1, 2.097847961257068];
const THETA13: f64 = 5.371920351148152;

/// Induced 1-norm (max column sum).
pub fn norm1<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|x| x.modulus()).sum::<f64>()).fold(0.0, f64::max)
}

fn scale<T: ComplexField<RealField = f64> + Copy>(c: f64) -> T {
    T::from_real(c)
}

/// Matrix exponential by scaling and squaring with a Padé approximant of
/// degree 3..13 chosen from the 1-norm.
pub fn expm<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let id = DMatrix::<T>::identity(n, n);
    if n == 0 {
        return id;
    }
    let nrm = norm1(a);
    for (k, coeffs) in [&PADE3[..], &PADE5[..], &PADE7[..], &PADE9[..]].iter().enumerate() {
        if nrm <= THETA[k] {
            return pade_low(a, coeffs);
        }
    }
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil().max(0.0) as i32 } else { 0 };
    let a = a * scale::<T>(2f64.powi(-s));
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * scale::<T>(b[13]) + &a4 * scale::<T>(b[11]) + &a2 * scale::<T>(b[9]))
        + &a6 * scale::<T>(b[7])
        + &a4 * scale::<T>(b[5])
        + &a2 * scale::<T>(b[3])
        + &id * scale::<T>(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * scale::<T>(b[12]) + &a4 * scale::<T>(b[10]) + &a2 * scale::<T>(b[8]))
        + &a6 * scale::<T>(b[6])
        + &a4 * scale::<T>(b[4])
        + &a2 * scale::<T>(b[2])
        + &id * scale::<T>(b[0]);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_low<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, b: &[f64]) -> DMatrix<T> {
    let n = a.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let mut pow = id.clone();
    let mut u = DMatrix::<T>::zeros(n, n);
    let mut v = DMatrix::<T>::zeros(n, n);
    for k in 0..b.len() / 2 {
        u += &pow * scale::<T>(b[2 * k + 1]);
        v += &pow * scale::<T>(b[2 * k]);
        pow = &pow * &a2;
    }
    let u = a * u;
    solve_pade(&u, &v)
}

fn solve_pade<T: ComplexField<RealField = f64> + Copy>(u: &DMatrix<T>, v: &DMatrix<T>) -> DMatrix<T> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is singular")
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn op_norm_real(a: &RMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

pub fn commutator<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Max entry of |A + Aᵀ|.
pub fn antisymmetry_defect(a: &RMat) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] + a[(j, i)]).abs());
        }
    }
    m
}

/// Replace A by (A − Aᵀ)/2 in place.
pub fn antisymmetrize(a: &mut RMat) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = 0.0;
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] - a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
}

/// Max entry of |A − A†|.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>) -> f64 {
    a.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// Integer power by repeated squaring.
pub fn matrix_power<T: ComplexField<RealField = f64> + Copy>(a: &DMatrix<T>, mut k: u64) -> DMatrix<T> {
    let n = a.nrows();
    let mut result = DMatrix::<T>::identity(n, n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Σ_{k≥k_min} coef(k)·[ad_Ω^k x]_{≥min_grade} for Ω = Σ_i Ω^(i), where
/// `omegas[i]` carries grade i+1 and only words of total grade ≥ `min_grade`
/// are kept. Requires |coef(k)| ≤ 1/k!; the k-sum stops once the tail bound
/// (2‖Ω‖)^{k+1}/(k+1)!·e^{2‖Ω‖}·‖x‖ drops below `tail_tol`. Returns the sum and
/// the last k included.
pub fn graded_commutator_series(
    omegas: &[CMat],
    x: &CMat,
    min_grade: usize,
    k_min: usize,
    coef: impl Fn(usize) -> Complex64,
    tail_tol: f64,
) -> crate::Result<(CMat, usize)> {
    let d = x.nrows();
    let mut total_omega = CMat::zeros(d, d);
    for o in omegas {
        total_omega += o;
    }
    let w = 2.0 * op_norm(&total_omega);
    let xn = op_norm(x);
    let mut full = x.clone();
    // low[j]: grade-j part of ad^k x for j < min_grade
    let mut low: Vec<CMat> = (0..min_grade).map(|j| if j == 0 { x.clone() } else { CMat::zeros(d, d) }).collect();
    let mut out = CMat::zeros(d, d);
    let mut term_bound = xn;
    for k in 1..=400usize {
        full = commutator(&total_omega, &full);
        let mut next: Vec<CMat> = vec![CMat::zeros(d, d); min_grade];
        for (j, slot) in next.iter_mut().enumerate() {
            for (i, o) in omegas.iter().enumerate() {
                if i < j {
                    *slot += commutator(o, &low[j - i - 1]);
                }
            }
        }
        low = next;
        if k >= k_min {
            let mut c = full.clone();
            for l in &low {
                c -= l;
            }
            out += c * coef(k);
        }
        term_bound *= w / (k as f64 + 1.0);
        if k >= k_min && term_bound * w.exp() < tail_tol {
            return Ok((out, k));
        }
    }
    Err(crate::Error::Truncation(format!("nested commutator series not converged (2‖Ω‖ = {w:.3e})")))
}
