//! Intensive-norm properties over seeded random local operators.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simmap_core::dense::{random_local_operator, sigma_x, sigma_z};
use simmap_core::lattice::{commutator_local, star_norm, Lattice, LocalOperator, LocalTerm, SupportSet};
use simmap_core::linalg::{expm, CMat, I};

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let a = CMat::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    expm(&((&a + a.adjoint()) * I))
}

fn max_support(a: &LocalOperator) -> usize {
    a.terms().iter().map(|t| t.support().len()).max().unwrap_or(0)
}

#[test]
fn factor_two_commutator_bound_fails_on_two_site_example() {
    let a = LocalOperator::new(vec![
        LocalTerm::explicit(SupportSet::new(vec![0]), sigma_x()).unwrap(),
        LocalTerm::explicit(SupportSet::new(vec![1]), sigma_x()).unwrap(),
    ]);
    let b = LocalOperator::new(vec![LocalTerm::explicit(SupportSet::new(vec![0, 1]), sigma_z().kronecker(&sigma_z())).unwrap()]);
    assert!((star_norm(&a) - 1.0).abs() < 1e-12 && (star_norm(&b) - 1.0).abs() < 1e-12);
    let c = star_norm(&commutator_local(&a, &b).unwrap());
    assert!((c - 4.0).abs() < 1e-12);
    // s_A = 1, s_B = 2
    assert!(c <= 2.0 * 3.0 + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn triangle(seed in 0u64..1_000_000) {
        let l = Lattice::chain(8).unwrap();
        let a = random_local_operator(&l, 1.0, 3.0, 1.0, seed).unwrap();
        let b = random_local_operator(&l, 1.0, 3.0, 1.0, seed ^ 0x5a5a).unwrap();
        prop_assert!(star_norm(&a.add(&b)) <= star_norm(&a) + star_norm(&b) + 1e-10);
    }

    #[test]
    fn commutator_within_support_weighted_bound(seed in 0u64..1_000_000) {
        let l = Lattice::chain(6).unwrap();
        let a = random_local_operator(&l, 1.0, 3.0, 1.0, seed).unwrap();
        let b = random_local_operator(&l, 1.0, 3.0, 1.0, seed.wrapping_add(1)).unwrap();
        let c = star_norm(&commutator_local(&a, &b).unwrap());
        let s = (max_support(&a) + max_support(&b)) as f64;
        prop_assert!(c <= 2.0 * s * star_norm(&a) * star_norm(&b) + 1e-10);
    }

    #[test]
    fn single_site_conjugation_preserves_norm(seed in 0u64..1_000_000) {
        let l = Lattice::chain(8).unwrap();
        let a = random_local_operator(&l, 1.0, 3.0, 1.0, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let us: Vec<CMat> = (0..8).map(|_| random_unitary(2, &mut rng)).collect();
        let b = a.conjugate_single_site(&us).unwrap();
        prop_assert!((star_norm(&b) - star_norm(&a)).abs() < 1e-10);
    }

    #[test]
    fn nearest_neighbour_layer_grows_norm_at_most_twofold(seed in 0u64..1_000_000, offset in 0usize..2) {
        let l = Lattice::chain(8).unwrap();
        let a = random_local_operator(&l, 1.0, 3.0, 1.0, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gates: Vec<(SupportSet, CMat)> =
            (offset..7).step_by(2).map(|x| (SupportSet::new(vec![x, x + 1]), random_unitary(4, &mut rng))).collect();
        let b = a.conjugate_gate_layer(&gates).unwrap();
        // r₀ = 1, d = 1
        prop_assert!(star_norm(&b) <= 2.0 * star_norm(&a) + 1e-10);
    }
}
