use cqm_core::closed_form::{self, BosonInitialState};
use cqm_core::fock::{self, CutoffPolicy, OracleModel};
use cqm_core::lindblad::{self, DecayRates, MomentVector};
use cqm_core::model::ModelParams;
use cqm_core::{lambda_for_target_critical, Error, Params, Regime};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn tuned_critical_point_moves_the_divergence() {
    let lambda = lambda_for_target_critical(0.3, 1.0).unwrap();
    let params = Params::new(1.0, 1000.0, 0.3, lambda).unwrap();
    assert!((params.critical_coupling() - 0.3).abs() < 1e-15);
    assert_eq!(params.regime(), Regime::Critical);
    assert!(matches!(
        closed_form::x_mean(&params, 1.0),
        Err(Error::Regime {
            found: Regime::Critical,
            ..
        })
    ));
    let probe = BosonInitialState::zero_plus_i_one();
    let below = closed_form::qfi_g_any(&probe, &params.with_g(0.29), 100.0)
        .unwrap()
        .value;
    let above = closed_form::qfi_g_any(&probe, &params.with_g(0.31), 100.0)
        .unwrap()
        .value;
    let far = closed_form::qfi_g_any(&probe, &params.with_g(0.2), 100.0)
        .unwrap()
        .value;
    assert!(below > far && above > far);
}

#[test]
fn effective_oracle_reproduces_quadrature_dynamics() {
    let probe = BosonInitialState::zero_plus_i_one();
    for params in [
        Params::new(1.0, 1000.0, 0.9, 0.0).unwrap(),
        Params::new(1.0, 1000.0, 0.099, -0.2475).unwrap(),
    ] {
        let tau2 = closed_form::optimal_time(&params, 2).unwrap();
        let times: Vec<f64> = (1..=24).map(|k| tau2 * k as f64 / 12.0).collect();
        let track = fock::quadrature_track_converged(
            OracleModel::Effective,
            &params,
            &probe,
            &times,
            &CutoffPolicy::default(),
        )
        .unwrap();
        for s in &track.values {
            let exact = closed_form::quadrature_sample(&params, s.t).unwrap();
            assert!(
                rel(s.x_var, exact.x_var) < 1e-6,
                "t={}: {} vs {}",
                s.t,
                s.x_var,
                exact.x_var
            );
            let scale = closed_form::inverted_variance_peak(&params, 2).unwrap();
            assert!((s.inv_var - exact.inv_var).abs() / scale < 1e-6);
        }
    }
}

#[test]
fn moment_integration_matches_dissipative_closed_forms() {
    let params = Params::new(1.0, 1000.0, 0.1, -0.247).unwrap();
    let rates = DecayRates::from_sum_difference(0.03, 0.01).unwrap();
    let tau = closed_form::optimal_time(&params, 1).unwrap();
    let grid: Vec<f64> = (0..=50).map(|k| tau * k as f64 / 5.0).collect();
    let m0 = MomentVector::from_boson_state(&BosonInitialState::zero_plus_i_one());
    let track = lindblad::integrate_moments(&m0, &params, &rates, &grid).unwrap();
    let x_scale = lindblad::x_mean_dissipative(&params, &DecayRates::zero(), tau / 2.0).unwrap();
    for s in &track {
        let x = lindblad::x_mean_dissipative(&params, &rates, s.t).unwrap();
        let var = lindblad::x_variance_dissipative(&params, &rates, s.t).unwrap();
        assert!((s.moments.x - x).abs() / x_scale < 1e-6);
        assert!(rel(s.moments.x_variance(), var) < 1e-6);
        assert!(s.moments.is_physical());
    }
}

#[test]
fn single_precision_path_matches_double() {
    let p32 = ModelParams::<f32>::new(1.0, 1000.0, 0.9, 0.0).unwrap();
    let p64 = Params::new(1.0, 1000.0, 0.9, 0.0).unwrap();
    let t = closed_form::optimal_time(&p64, 1).unwrap();
    let a = closed_form::inverted_variance(&p32, t as f32).unwrap() as f64;
    let b = closed_form::inverted_variance(&p64, t).unwrap();
    assert!(rel(a, b) < 1e-3);
    let probe32 = BosonInitialState::<f32>::zero_plus_i_one();
    let track = fock::quadrature_track(OracleModel::Effective, &p32, &probe32, &[t as f32 / 4.0], 48).unwrap();
    let exact = closed_form::x_mean(&p64, t / 4.0).unwrap();
    assert!(rel(track[0].x_mean as f64, exact) < 1e-4);
}
