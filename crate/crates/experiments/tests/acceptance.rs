use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use cqm_core::fock::{self, CutoffPolicy, OracleModel};
use cqm_core::lindblad::{self, DecayRates, MomentVector};
use cqm_core::{closed_form, lambda_for_target_critical, BosonState, Params};
use cqm_experiments::{fit_loglog_slope, run, ExperimentConfig, ExperimentId};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn params(g: f64, lambda: f64) -> Params {
    Params::new(1.0, 1000.0, g, lambda).unwrap()
}

fn probe() -> BosonState {
    BosonState::zero_plus_i_one()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn critical_point() -> Outcome {
    let gc = params(0.05, -0.2475).critical_coupling();
    let mut worst: f64 = 0.0;
    for k in 1..=100 {
        let g = 0.02 * k as f64;
        let lambda = lambda_for_target_critical(g, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max((params(g, lambda).critical_coupling() - g).abs());
    }
    check(
        (gc - 0.1).abs() <= 1e-12 && worst <= 1e-12,
        format!("g_c(-0.2475) = {gc:.17}, worst round-trip error {worst:.1e} over 100 targets"),
    )
}

fn variance_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for lambda in linspace(-0.24, 1.0, 50) {
        let gc = params(0.0, lambda).critical_coupling();
        for frac in linspace(0.02, 0.98, 50) {
            let p = params(frac * gc, lambda);
            for t in linspace(0.0, 500.0, 50) {
                let x = closed_form::x_mean(&p, t).unwrap();
                let second = closed_form::x_second_moment(&p, t).unwrap();
                let printed = closed_form::x_variance(&p, t).unwrap();
                worst = worst.max(rel(second - x * x, printed));
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("worst relative deviation {worst:.1e} on 50x50x50 points"),
    )
}

fn cross_engine_dynamics() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (g, lambda) in [(0.9, 0.0), (0.099, -0.2475)] {
        let p = params(g, lambda);
        let t_end = 2.0 * closed_form::optimal_time(&p, 2).unwrap();
        let times = linspace(0.0, t_end, 41);
        let track =
            fock::quadrature_track_converged(OracleModel::Effective, &p, &probe(), &times, &CutoffPolicy::default())
                .map_err(|e| e.to_string())?;
        // ⟨X⟩ and I_g pass through zero, so they are compared on the scale of
        // their oscillation amplitude and of the largest peak in the window
        let amplitude = (2.0 * p.epsilon_g()).sqrt().recip();
        let peak = closed_form::inverted_variance_peak(&p, 4).unwrap();
        let (mut dx, mut dv, mut di) = (0.0f64, 0.0f64, 0.0f64);
        for s in &track.values {
            let c = closed_form::quadrature_sample(&p, s.t).unwrap();
            dx = dx.max((s.x_mean - c.x_mean).abs() / amplitude);
            dv = dv.max(rel(s.x_var, c.x_var));
            di = di.max((s.inv_var - c.inv_var).abs() / peak);
        }
        ok &= dx.max(dv).max(di) <= 1e-6;
        lines.push(format!(
            "eps_g={:.4}: <X> {dx:.1e}, var {dv:.1e}, I_g {di:.1e} (n_cut {})",
            p.epsilon_g(),
            track.n_cut
        ));
    }
    check(ok, lines.join("; "))
}

fn qfi_methods() -> Outcome {
    let p = params(0.9, 0.0);
    let policy = CutoffPolicy::default();
    let mut worst: f64 = 0.0;
    for t in [0.5, 2.0, 7.0, 13.0, 20.0] {
        let gen = fock::generator_qfi_converged(&p, t, &probe(), &policy).map_err(|e| e.to_string())?;
        let ov = fock::qfi_overlap(&p, t, &probe(), 1e-5 * p.g, OracleModel::Effective, gen.n_cut)
            .map_err(|e| e.to_string())?;
        worst = worst.max(rel(ov, gen.values));
    }
    // squeezing at ε_g = 0.005 spreads the state over ~4000 Fock levels
    let deep = CutoffPolicy {
        start: 256,
        max: 8192,
        tolerance: 1e-6,
    };
    let mut devs = Vec::new();
    for eps_g in [0.02_f64, 0.01, 0.005] {
        let p = params((1.0 - eps_g).sqrt(), 0.0);
        let t = std::f64::consts::PI / p.effective_oscillator().epsilon.sqrt();
        let gen = fock::generator_qfi_converged(&p, t, &probe(), &deep).map_err(|e| e.to_string())?;
        let closed = closed_form::qfi_g_any(&probe(), &p, t)
            .map_err(|e| e.to_string())?
            .value;
        devs.push(rel(closed, gen.values));
    }
    let shrinking = devs.windows(2).all(|w| w[1] < w[0]);
    check(
        worst <= 1e-4 && shrinking,
        format!(
            "generator vs overlap worst {worst:.1e}; closed vs generator at eps_g 0.02/0.01/0.005: {:.3e}/{:.3e}/{:.3e}",
            devs[0], devs[1], devs[2]
        ),
    )
}

fn reciprocal_relation() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let lambda = rng.gen_range(-0.24..0.5);
        let gc = params(0.0, lambda).critical_coupling();
        let p = params(rng.gen_range(0.0..0.95) * gc, lambda);
        worst = worst.max(fock::verify_reciprocal_relation(&p, 60).map_err(|e| e.to_string())?);
    }
    check(
        worst < 1e-9,
        format!("worst interior residual {worst:.1e} over 10 random points"),
    )
}

fn peak_and_ratio() -> Outcome {
    let mut peak_dev: f64 = 0.0;
    for (g, lambda) in [(0.9, 0.0), (0.1, -0.247), (0.099, -0.2475)] {
        let p = params(g, lambda);
        for n in 1..=50 {
            let tau = closed_form::optimal_time(&p, n).unwrap();
            let at = closed_form::inverted_variance(&p, tau).unwrap();
            peak_dev = peak_dev.max(rel(at, closed_form::inverted_variance_peak(&p, n).unwrap()));
        }
    }
    let p = params(0.099, -0.2475);
    let policy = CutoffPolicy::default();
    let limit = closed_form::ig_fg_ratio(&probe(), &p).unwrap();
    let labels: Vec<usize> = (5..=20).collect();
    let taus: Vec<f64> = labels
        .iter()
        .map(|&n| closed_form::optimal_time(&p, n).unwrap())
        .collect();
    let track = fock::quadrature_track_converged(OracleModel::Effective, &p, &probe(), &taus, &policy)
        .map_err(|e| e.to_string())?;
    let mut ratio_dev: f64 = 0.0;
    for (s, &tau) in track.values.iter().zip(&taus) {
        let f = fock::generator_qfi_converged(&p, tau, &probe(), &policy).map_err(|e| e.to_string())?;
        ratio_dev = ratio_dev.max(rel(s.inv_var / f.values, limit));
    }
    let critical = closed_form::ig_fg_ratio(&probe(), &params(1.0, 0.0)).unwrap();
    check(
        peak_dev <= 1e-10 && ratio_dev <= 0.05 && (critical - 0.4).abs() <= 0.02,
        format!(
            "peak formula worst {peak_dev:.1e} (n <= 50); oracle I/F vs 1/(2Var) worst {:.2}% at eps_g {:.4} for n=5..20; critical ratio {critical:.12}",
            100.0 * ratio_dev,
            p.epsilon_g()
        ),
    )
}

fn frequency_scaling() -> Outcome {
    let policy = CutoffPolicy::default();
    let etas = [1e2, 3e2, 1e3, 3e3, 1e4];
    let mut curves = Vec::new();
    for (g, lambda) in [(0.9, 0.0), (0.1, -0.247)] {
        let mut deltas = Vec::new();
        for eta in etas {
            let p = Params::new(1.0, eta, g, lambda).unwrap();
            let d = fock::finite_frequency_discrepancy(&p, eta, 1, &policy).map_err(|e| e.to_string())?;
            deltas.push(d.delta.abs());
        }
        let fit = fit_loglog_slope(&etas, &deltas).map_err(|e| e.to_string())?;
        curves.push((g, lambda, deltas, fit.slope));
    }
    let slopes_ok = curves.iter().all(|c| (c.3 + 1.0).abs() <= 0.15);
    let below = curves[1].2.iter().zip(&curves[0].2).all(|(tuned, plain)| tuned < plain);
    let detail = curves
        .iter()
        .map(|(g, l, d, s)| format!("(g={g}, lambda={l}) slope {s:.3}, |delta| {:.3e}..{:.3e}", d[0], d[4]))
        .collect::<Vec<_>>()
        .join("; ");
    check(slopes_ok && below, format!("{detail}; tuned curve below: {below}"))
}

fn decoherence() -> Outcome {
    let rates = DecayRates::from_sum_difference(0.03, 0.01).unwrap();
    let m0 = MomentVector::from_boson_state(&probe());
    let mut lines = Vec::new();
    let mut ok = true;
    for (g, lambda) in [(0.1, -0.247), (0.1, 0.0)] {
        let p = params(g, lambda);
        let times = linspace(0.0, 10.0 * closed_form::optimal_time(&p, 1).unwrap(), 401);
        let integrate = |q: &Params| lindblad::integrate_moments(&m0, q, &rates, &times).map_err(|e| e.to_string());
        let dg = 1e-5 * g;
        let mid = integrate(&p)?;
        let up = integrate(&p.with_g(g + dg))?;
        let down = integrate(&p.with_g(g - dg))?;
        let amplitude = (2.0 * p.epsilon_g()).sqrt().recip();
        let closed_d: Vec<f64> = times
            .iter()
            .map(|&t| lindblad::x_deriv_g_dissipative(&p, &rates, t).unwrap())
            .collect();
        let d_scale = closed_d.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let (mut dx, mut dv, mut dd) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..times.len() {
            let t = times[k];
            dx = dx.max((mid[k].moments.x - lindblad::x_mean_dissipative(&p, &rates, t).unwrap()).abs() / amplitude);
            dv = dv.max(rel(
                mid[k].moments.x_variance(),
                lindblad::x_variance_dissipative(&p, &rates, t).unwrap(),
            ));
            let d = (up[k].moments.x - down[k].moments.x) / (2.0 * dg);
            dd = dd.max((d - closed_d[k]).abs() / d_scale);
        }
        ok &= dx.max(dv).max(dd) <= 1e-6;
        lines.push(format!("lambda={lambda}: <X> {dx:.1e}, var {dv:.1e}, d<X>/dg {dd:.1e}"));
    }
    let zero = DecayRates::zero();
    let mut unitary: f64 = 0.0;
    for (g, lambda) in [(0.9, 0.0), (0.1, -0.247), (0.1, 0.0)] {
        let p = params(g, lambda);
        for t in linspace(0.0, 300.0, 301) {
            let a = lindblad::dissipative_sample(&p, &zero, t).unwrap();
            let b = closed_form::quadrature_sample(&p, t).unwrap();
            for (x, y) in [
                (a.x_mean, b.x_mean),
                (a.x_deriv_g, b.x_deriv_g),
                (a.x_var, b.x_var),
                (a.inv_var, b.inv_var),
            ] {
                unitary = unitary.max((x - y).abs() / y.abs().max(1.0));
            }
        }
    }
    let (tuned, plain) = (params(0.1, -0.247), params(0.1, 0.0));
    let mut gain = f64::INFINITY;
    for n in 1..=10 {
        let at = |p: &Params| {
            lindblad::inverted_variance_dissipative(p, &rates, closed_form::optimal_time(p, n).unwrap()).unwrap()
        };
        gain = gain.min(at(&tuned) / at(&plain));
    }
    ok &= unitary <= 1e-12 && gain >= 1e3;
    lines.push(format!(
        "zero-rate reduction {unitary:.1e}; smallest peak gain {gain:.3e} (n=1..10)"
    ));
    check(ok, lines.join("; "))
}

fn dataset_regeneration() -> Outcome {
    let ids = [
        ExperimentId::QfiEvolution,
        ExperimentId::QfiVsG,
        ExperimentId::QfiMap,
        ExperimentId::InvertedVariance,
        ExperimentId::RatioScaling,
        ExperimentId::FrequencyScaling,
        ExperimentId::Decoherence,
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for id in ids {
        let config = ExperimentConfig::defaults(id);
        let a = run(&config, 1, None).map_err(|e| e.to_string())?;
        let b = run(&config, 3, None).map_err(|e| e.to_string())?;
        let same = a.dataset.rows.len() == b.dataset.rows.len()
            && a.dataset
                .rows
                .iter()
                .flatten()
                .zip(b.dataset.rows.iter().flatten())
                .all(|(x, y)| x.to_bits() == y.to_bits());
        ok &= a.failed.is_empty() && b.failed.is_empty() && same;
        lines.push(format!(
            "{id}: {} rows, {} failed, deterministic {same}",
            a.dataset.rows.len(),
            a.failed.len()
        ));
    }
    check(ok, lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("critical-point regulation", critical_point),
        ("variance identity", variance_identity),
        ("cross-engine dynamics", cross_engine_dynamics),
        ("QFI method agreement", qfi_methods),
        ("reciprocal relation", reciprocal_relation),
        ("peak and ratio scaling", peak_and_ratio),
        ("finite-frequency scaling", frequency_scaling),
        ("decoherence", decoherence),
        ("dataset regeneration", dataset_regeneration),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS: {name}: {detail} [{secs:.1} s]", k + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL: {name}: {detail} [{secs:.1} s]", k + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
