use super::*;
use crate::closed_form::{self, BosonInitialState};
use nalgebra::DVector;
use num_complex::Complex64;

fn p(g: f64, lambda: f64) -> ModelParams<f64> {
    ModelParams::new(1.0, 1000.0, g, lambda).unwrap()
}

fn probe() -> BosonInitialState<f64> {
    BosonInitialState::zero_plus_i_one()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn decoupled_full_hamiltonian_is_diagonal() {
    let params = ModelParams::new(1.0, 7.0, 0.0, 0.0).unwrap();
    let h = build_full_hamiltonian(&params, 10).unwrap();
    let m = h.matrix();
    for i in 0..20 {
        for j in 0..20 {
            let expected = if i == j {
                let (spin, n) = (i / 10, i % 10);
                n as f64 + if spin == 0 { -3.5 } else { 3.5 }
            } else {
                0.0
            };
            assert_eq!(m[(i, j)], Complex64::new(expected, 0.0));
        }
    }
    assert_eq!(h.hermiticity_residual(), 0.0);
}

#[test]
fn quadratic_term_ground_energy_is_bogoliubov_shift() {
    for &lambda in &[0.75, -0.2, 0.1] {
        let params = ModelParams::new(1.0, 10.0, 0.0, lambda).unwrap();
        let h = build_full_hamiltonian(&params, 200).unwrap();
        let spec = Spectrum::new(&h).unwrap();
        let ground = spec.eigenvalues()[0] + 5.0;
        let expected = (params.omega_bar() - 1.0) / 2.0;
        assert!((ground - expected).abs() < 1e-10, "λ={lambda}: {ground} vs {expected}");
    }
}

#[test]
fn squeezed_frame_has_the_same_low_spectrum() {
    let params = ModelParams::new(1.0, 10.0, 0.5, 0.3).unwrap();
    let full = Spectrum::new(&build_full_hamiltonian(&params, 160).unwrap()).unwrap();
    let squeezed = Spectrum::new(&build_squeezed_hamiltonian(&params, 160).unwrap()).unwrap();
    let (a, b) = (full.eigenvalues(), squeezed.eigenvalues());
    for k in 0..10 {
        assert!((a[k] - b[k]).abs() < 1e-8, "level {k}: {} vs {}", a[k], b[k]);
    }
    assert_eq!(full.block_count(), 2);
}

#[test]
fn random_hamiltonians_are_hermitian() {
    let mut seed = 0x2545f4914f6cdd1du64;
    let mut next = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..10 {
        let params = ModelParams::new(0.5 + next(), 1.0 + 100.0 * next(), 2.0 * next(), -0.1 + next()).unwrap();
        for h in [
            build_full_hamiltonian(&params, 12).unwrap(),
            build_squeezed_hamiltonian(&params, 12).unwrap(),
        ] {
            assert!(h.hermiticity_residual() < HERMITICITY_TOL);
        }
    }
}

#[test]
fn effective_oscillator_spectrum() {
    let free = build_effective_hamiltonian(&p(0.0, 0.0), 16).unwrap();
    let values = Spectrum::new(&free).unwrap().eigenvalues();
    for (n, e) in values.iter().enumerate() {
        assert!((e - (n as f64 + 0.5)).abs() < 1e-12);
    }

    let params = p(0.5, 0.3);
    let osc = params.effective_oscillator();
    let values = Spectrum::new(&build_effective_hamiltonian(&params, 400).unwrap())
        .unwrap()
        .eigenvalues();
    let gap = osc.omega_bar * osc.epsilon_g.sqrt();
    for k in 0..5 {
        assert!(rel(values[k + 1] - values[k], gap) < 1e-10);
    }

    assert!(matches!(
        build_effective_hamiltonian(&p(1.0, 0.0), 16),
        Err(Error::Regime { .. })
    ));
    assert!(matches!(
        build_effective_hamiltonian(&p(0.5, 0.0), 3),
        Err(Error::CutoffTooSmall { .. })
    ));
}

#[test]
fn effective_ground_state_is_squeezed_vacuum() {
    for &(g, lambda) in &[(0.9, 0.0), (0.099, -0.2475), (1.2, 0.0)] {
        let params = p(g, lambda);
        let n_cut = 600;
        let h = build_effective_hamiltonian(&params, n_cut).unwrap();
        let matrix = h.real_matrix().unwrap();
        let (_, vectors) = f64::symmetric_eigen(matrix);
        let ground = DVector::from_fn(n_cut, |i, _| Complex64::new(vectors[(i, 0)], 0.0));
        let state = JointState::new(ground, n_cut, 1).unwrap();
        let (x, xx) = state.quadrature_moments();
        let zeta = if g < params.critical_coupling() {
            params.epsilon_g()
        } else {
            params.epsilon_g_alpha()
        };
        assert!(x.abs() < 1e-12);
        assert!(rel(xx, 1.0 / (2.0 * zeta.sqrt())) < 1e-10, "g={g}: {xx}");
    }
}

#[test]
fn evolution_basics() {
    let h = build_effective_hamiltonian(&p(0.9, 0.0), 80).unwrap();
    let psi = JointState::boson(&probe(), 80).unwrap();
    let same = evolve(&h, &psi, 0.0).unwrap();
    for (a, b) in same.amplitudes().iter().zip(psi.amplitudes().iter()) {
        assert!((a - b).norm() < 1e-14);
    }
    let later = evolve(&h, &psi, 123.4).unwrap();
    assert!((later.norm_sqr() - 1.0).abs() < 1e-10);

    let diag = build_full_hamiltonian(&ModelParams::new(1.0, 3.0, 0.0, 0.0).unwrap(), 8).unwrap();
    let basis = JointState::spin_down(&BosonInitialState::fock(2, 8).unwrap(), 8).unwrap();
    let moved = evolve(&diag, &basis, 2.7).unwrap();
    for (a, b) in moved.amplitudes().iter().zip(basis.amplitudes().iter()) {
        assert!((a.norm() - b.norm()).abs() < 1e-14);
    }
    let expected = Complex64::new(0.0, -(2.0 - 1.5) * 2.7).exp();
    assert!((moved.amplitudes()[2] - expected).norm() < 1e-13);
}

#[test]
fn evolution_detects_truncation_leak() {
    let params = p(0.099, -0.2475);
    let h = build_effective_hamiltonian(&params, 32).unwrap();
    let psi = JointState::boson(&probe(), 32).unwrap();
    let tau = closed_form::optimal_time(&params, 1).unwrap();
    assert!(matches!(
        evolve(&h, &psi, tau / 2.0),
        Err(Error::TruncationLeak { n_cut: 32, .. })
    ));
}

#[test]
fn state_validation() {
    let bad = DVector::from_element(8, Complex64::new(1.0, 0.0));
    assert!(matches!(JointState::new(bad, 4, 2), Err(Error::NotNormalized { .. })));
    let v = DVector::from_element(6, Complex64::new(0.0, 0.0));
    assert!(matches!(JointState::new(v, 4, 2), Err(Error::DimensionMismatch { .. })));
    let big = BosonInitialState::<f64>::fock(10, 12).unwrap();
    assert!(matches!(JointState::boson(&big, 8), Err(Error::CutoffTooSmall { .. })));

    let h = build_effective_hamiltonian(&p(0.5, 0.0), 10).unwrap();
    let psi = JointState::spin_down(&probe(), 10).unwrap();
    assert!(matches!(evolve(&h, &psi, 1.0), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn operator_validation() {
    let mut m = nalgebra::DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
    m[(0, 1)] = Complex64::new(1.0, 1.0);
    m[(1, 0)] = Complex64::new(1.0, 1.0);
    assert!(matches!(
        HermitianOperator::new(m.clone(), 2, 1),
        Err(Error::NotHermitian { .. })
    ));
    m[(1, 0)] = Complex64::new(1.0, -1.0);
    let op = HermitianOperator::new(m, 2, 1).unwrap();
    assert!(matches!(Spectrum::new(&op), Err(Error::ComplexOperator)));

    // X changes parity, so it cannot act inside the parity blocks of H_np
    let h = build_effective_hamiltonian(&p(0.5, 0.0), 10).unwrap();
    let x = HermitianOperator::from_real(&position::<f64>(10), 10, 1).unwrap();
    let psi = JointState::boson(&probe(), 10).unwrap();
    let spec = Spectrum::new(&h).unwrap();
    assert_eq!(spec.block_count(), 2);
    assert!(matches!(
        spec.evolve_with_derivative(&psi, &x, 1.0),
        Err(Error::BlockMismatch)
    ));
}

#[test]
fn x_mean_matches_closed_form_to_1e8() {
    let params = p(0.9, 0.0);
    let tau = closed_form::optimal_time(&params, 1).unwrap();
    let times: Vec<f64> = (0..=40).map(|k| 2.0 * tau * k as f64 / 40.0).collect();
    let track = quadrature_track_converged(
        OracleModel::Effective,
        &params,
        &probe(),
        &times,
        &CutoffPolicy::default(),
    )
    .unwrap();
    let scale = 1.0 / (2.0 * 0.19f64).sqrt();
    for s in &track.values {
        let exact = closed_form::x_mean(&params, s.t).unwrap();
        assert!((s.x_mean - exact).abs() < 1e-8 * scale, "t={}", s.t);
    }
    // spec example: quarter of τ_1
    let t = 7.2072 / 4.0;
    let one = quadrature_track(OracleModel::Effective, &params, &probe(), &[t], track.n_cut).unwrap();
    assert!((one[0].x_mean - closed_form::x_mean(&params, t).unwrap()).abs() < 1e-8);
}

#[test]
fn spectral_derivative_matches_finite_difference() {
    let params = p(0.8, 0.1).with_frequency_ratio(50.0);
    let n_cut = 48;
    let t = 3.0;
    for model in [OracleModel::Effective, OracleModel::Full, OracleModel::Squeezed] {
        let track = quadrature_track(model, &params, &probe(), &[t], n_cut).unwrap();
        let h = 1e-5;
        let x_at = |g: f64| quadrature_track(model, &params.with_g(g), &probe(), &[t], n_cut).unwrap()[0].x_mean;
        let fd = (x_at(params.g + h) - x_at(params.g - h)) / (2.0 * h);
        assert!(
            rel(track[0].x_deriv_g, fd) < 1e-6,
            "{model:?}: {} vs {fd}",
            track[0].x_deriv_g
        );
    }
}

#[test]
fn generator_and_overlap_agree() {
    let params = p(0.9, 0.0);
    let n_cut = 128;
    assert_eq!(generator_qfi(&params, 0.0, &probe(), n_cut).unwrap(), 0.0);
    assert_eq!(
        qfi_overlap(&params, 0.0, &probe(), 1e-5, OracleModel::Effective, n_cut).unwrap(),
        0.0
    );
    for &t in &[0.5, 2.0, 7.0, 13.0, 20.0] {
        let gen = generator_qfi(&params, t, &probe(), n_cut).unwrap();
        let dg = 1e-5 * params.g;
        let ov = qfi_overlap(&params, t, &probe(), dg, OracleModel::Effective, n_cut).unwrap();
        let ov_half = qfi_overlap(&params, t, &probe(), dg / 2.0, OracleModel::Effective, n_cut).unwrap();
        assert!(rel(ov, gen) < 1e-4, "t={t}: overlap {ov} generator {gen}");
        assert!(rel(ov_half, ov) < 1e-3);
    }
}

#[test]
fn overlap_rejects_large_steps() {
    let params = p(0.9, 0.0);
    let r = qfi_overlap(&params, 20.0, &probe(), 0.1, OracleModel::Effective, 256);
    assert!(matches!(r, Err(Error::StepTooLarge { .. })), "{r:?}");
    assert!(matches!(
        qfi_overlap(&params, 1.0, &probe(), 0.0, OracleModel::Effective, 64),
        Err(Error::InvalidParams { .. })
    ));
}

#[test]
fn overlap_deficit_is_precise_for_close_states() {
    let a = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let theta: f64 = 1e-7;
    let b = DVector::from_vec(vec![Complex64::new(theta.cos(), 0.0), Complex64::new(theta.sin(), 0.0)]);
    let d = overlap_deficit(&a, &b);
    let exact = 2.0 * (theta / 2.0).sin().powi(2);
    assert!(rel(d, exact) < 1e-8, "{d} vs {exact}");
}

#[test]
fn near_critical_overlap_tracks_closed_form() {
    let params = p(0.099, -0.2475);
    let t = 1000.0;
    let policy = CutoffPolicy::default();
    let exact = generator_qfi_converged(&params, t, &probe(), &policy).unwrap();
    // the fidelity expansion carries a relative bias of order the deficit
    // itself, F dg²/8, so dg is chosen to keep it near 1e-6
    let dg = (8e-6 / exact.values).sqrt();
    let ov = qfi_overlap(&params, t, &probe(), dg, OracleModel::Effective, exact.n_cut).unwrap();
    let closed = closed_form::qfi_g_any(&probe(), &params, t).unwrap().value;
    assert!(rel(closed, ov) < 0.1, "closed {closed} overlap {ov}");
    assert!(rel(exact.values, ov) < 1e-4, "generator {} overlap {ov}", exact.values);
}

#[test]
fn beyond_critical_generator_tracks_closed_form_near_the_gap() {
    // leading-order formula is asymptotic in ε_α → 0 at √ε_α t = O(1)
    let params = p(1.005, 0.0);
    let frame = params.beyond_critical_frame().unwrap();
    let t = std::f64::consts::PI / frame.epsilon_alpha.sqrt();
    let exact = generator_qfi_converged(&params, t, &probe(), &CutoffPolicy::default()).unwrap();
    let closed = closed_form::qfi_g_any(&probe(), &params, t).unwrap().value;
    assert!(
        rel(closed, exact.values) < 0.1,
        "closed {closed} exact {}",
        exact.values
    );
}

#[test]
fn reciprocal_relation_examples() {
    assert!(verify_reciprocal_relation(&p(0.9, 0.0), 60).unwrap() < 1e-9);
    assert!(verify_reciprocal_relation(&p(0.0, 0.0), 60).unwrap() < 1e-9);
    assert!(matches!(
        verify_reciprocal_relation(&p(1.2, 0.0), 60),
        Err(Error::Regime { .. })
    ));
    let full = reciprocal_residual(&p(0.9, 0.0), 60, 60).unwrap();
    assert!(full > 1.0);
}

#[test]
fn finite_frequency_discrepancy_shrinks_with_eta() {
    let policy = CutoffPolicy::default();
    let base = p(0.9, 0.0);
    let low = finite_frequency_discrepancy(&base, 1e2, 1, &policy).unwrap();
    let high = finite_frequency_discrepancy(&base, 1e3, 1, &policy).unwrap();
    assert!(high.delta.abs() < low.delta.abs());
    assert!(
        rel(
            low.inv_var_limit,
            closed_form::inverted_variance_peak(&base, 1).unwrap()
        ) < 1e-15
    );
    let tuned = finite_frequency_discrepancy(&p(0.1, -0.247), 1e3, 1, &policy).unwrap();
    assert!(tuned.delta.abs() < high.delta.abs());
    assert!(matches!(
        finite_frequency_discrepancy(&base, 5.0, 1, &policy),
        Err(Error::InvalidParams { .. })
    ));
}

#[test]
fn full_model_tracks_effective_theory_at_large_eta() {
    let params = p(0.9, 0.0);
    let t = closed_form::optimal_time(&params, 1).unwrap() / 2.0;
    let mut deviations = Vec::new();
    for eta in [1e2, 1e3] {
        let track = quadrature_track_converged(
            OracleModel::Full,
            &params.with_frequency_ratio(eta),
            &probe(),
            &[t],
            &CutoffPolicy::default(),
        )
        .unwrap();
        let exact = closed_form::x_mean(&params, t).unwrap();
        deviations.push(rel(track.values[0].x_mean, exact));
    }
    assert!(deviations[1] < 10.0 / 1e3, "{deviations:?}");
    assert!(deviations[1] < deviations[0]);
}

#[test]
fn generic_over_f32() {
    let params = ModelParams::<f32>::new(1.0, 1000.0, 0.5, 0.0).unwrap();
    let h = build_effective_hamiltonian(&params, 24).unwrap();
    let values = Spectrum::new(&h).unwrap().eigenvalues();
    let gap = params.omega_bar() * params.epsilon_g().sqrt();
    assert!(((values[1] - values[0]) - gap).abs() < 1e-4);
    let psi0 = BosonInitialState::<f32>::zero_plus_i_one();
    let track = quadrature_track(OracleModel::Effective, &params, &psi0, &[1.0], 24).unwrap();
    let exact = closed_form::x_mean(&params, 1.0).unwrap();
    assert!((track[0].x_mean - exact).abs() < 1e-4);
}

#[test]
fn vanishing_mean_is_compared_on_the_spread() {
    let sample = |x_mean: f64, inv_var: f64| closed_form::QuadratureSample {
        t: 1.0,
        x_mean,
        x_deriv_g: 10.0,
        x_var: 1.0,
        inv_var,
    };
    let a = vec![sample(1e-13, 100.0)];
    let b = vec![sample(5e-13, 100.0)];
    assert!(b.change_from(&a) < 1e-12);
    let c = vec![sample(5e-13, 100.1)];
    assert!((c.change_from(&a) - 0.1 / 100.1).abs() < 1e-12);
    let d = vec![sample(0.01, 100.0)];
    assert!((d.change_from(&a) - (0.01 - 1e-13)).abs() < 1e-12);
}
