//! Cross-checks of the Majorana engine against Jordan-Wigner density matrices.

use num_complex::Complex64;
use simmap_core::dense::{
    depolarize_mode_dense, depolarize_qubit_dense, evolve_lindblad_dense, expectation, jordan_wigner_dense, mean_occupation_operator, number_operator,
    DenseDrive, DenseOperator, DenseState, Dissipator,
};
use simmap_core::gaussian::{
    build_quadratic, depolarize_modes, evolve_exact, evolve_noisy_ode, fully_occupied_state, mode_occupations, vacuum_state, DepolSpec, GaussianDrive,
    QuadSpec, Waveform,
};
use simmap_core::linalg::{expm, max_abs};

fn chain_h(n: usize) -> simmap_core::gaussian::QuadraticHamiltonian {
    build_quadratic(n, QuadSpec::Linear { c1: 1.0, c2: 0.5 }).unwrap()
}

#[test]
fn exact_evolution_matches_dense_per_mode() {
    for n in 2..=5 {
        let h = chain_h(n);
        let g = evolve_exact(&vacuum_state(n), &h, 1.0).unwrap();
        let hd = jordan_wigner_dense(&h).unwrap();
        let u = expm(&(&hd.matrix * Complex64::new(0.0, -1.0)));
        let rho = simmap_core::dense::evolve_unitary(&DenseState::vacuum(n).unwrap(), &u);
        let occ = mode_occupations(&g);
        for i in 0..n {
            let o = DenseOperator::new(n, number_operator(n, i)).unwrap();
            let d = expectation(&rho, &o).unwrap();
            assert!((occ.per_mode[i] - d).abs() < 1e-9, "N={n} mode {i}: {} vs {d}", occ.per_mode[i]);
        }
    }
}

#[test]
fn fully_occupied_matches_dense() {
    let s = DenseState::basis(&[1, 1, 1]).unwrap();
    let m = expectation(&s, &mean_occupation_operator(3)).unwrap();
    assert_eq!(m, mode_occupations(&fully_occupied_state(3)).mean);
}

#[test]
fn commutator_option_matches_dense_commutator() {
    let n = 3;
    let mu = jordan_wigner_dense(&build_quadratic(n, QuadSpec::Mu).unwrap()).unwrap().matrix;
    let iq = jordan_wigner_dense(&build_quadratic(n, QuadSpec::IQ).unwrap()).unwrap().matrix;
    let comm = jordan_wigner_dense(&build_quadratic(n, QuadSpec::Commutator).unwrap()).unwrap().matrix;
    // the A-matrix commutator represents −i[μ, iQ] = [μ, Q]
    let expected = (&mu * &iq - &iq * &mu) * Complex64::new(0.0, -1.0);
    assert!(max_abs(&(comm - expected)) < 1e-13);
}

#[test]
fn discrete_depolarizing_matches_dense_channel() {
    let n = 3;
    let h = chain_h(n);
    let g = evolve_exact(&vacuum_state(n), &h, 0.7).unwrap();
    let hd = jordan_wigner_dense(&h).unwrap();
    let u = expm(&(&hd.matrix * Complex64::new(0.0, -0.7)));
    let rho = simmap_core::dense::evolve_unitary(&DenseState::vacuum(n).unwrap(), &u);
    for mode in 0..n {
        let gd = depolarize_modes(&g, &DepolSpec { modes: vec![mode], strength: 0.1 }).unwrap();
        let rd = depolarize_mode_dense(&rho, mode, 0.1).unwrap();
        let occ = mode_occupations(&gd);
        for i in 0..n {
            let o = DenseOperator::new(n, number_operator(n, i)).unwrap();
            assert!((occ.per_mode[i] - expectation(&rd, &o).unwrap()).abs() < 1e-10);
        }
    }
    // on mode 0 the qubit partial-trace channel coincides with the mode channel
    let a = depolarize_mode_dense(&rho, 0, 0.3).unwrap();
    let b = depolarize_qubit_dense(&rho, 0, 0.3).unwrap();
    assert!(max_abs(&(a.rho - b.rho)) < 1e-14);
}

#[test]
fn driven_noisy_dynamics_match_dense_lindblad() {
    let n = 3;
    let (period, tau, gamma) = (0.25, 1.5, 0.01);
    let mu = build_quadratic(n, QuadSpec::Mu).unwrap();
    let iq = build_quadratic(n, QuadSpec::IQ).unwrap();
    let fh = Waveform::cosine(1.0, 0.5, period);
    let fg = Waveform::sine(1.0, 0.5, period);
    let drive = GaussianDrive::new(vec![(fh.clone(), mu.clone()), (fg.clone(), iq.clone())]).unwrap();
    let g = evolve_noisy_ode(&vacuum_state(n), &drive, &DepolSpec::all(n, gamma), 0.0, tau, 1e-11).unwrap();
    let dd = DenseDrive { n, terms: vec![(fh, jordan_wigner_dense(&mu).unwrap().matrix), (fg, jordan_wigner_dense(&iq).unwrap().matrix)] };
    let diss: Vec<Dissipator> = (0..n).map(Dissipator::FermionMode).collect();
    let rho = evolve_lindblad_dense(&DenseState::vacuum(n).unwrap(), &dd, &diss, gamma, 0.0, tau, 1e-11).unwrap();
    assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    let d = expectation(&rho, &mean_occupation_operator(n)).unwrap();
    assert!((mode_occupations(&g).mean - d).abs() < 1e-7, "{} vs {d}", mode_occupations(&g).mean);
}
