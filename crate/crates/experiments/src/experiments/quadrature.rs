use cqm_core::closed_form;
use cqm_core::fock::{self, OracleModel};
use cqm_core::{Engine, Params, QuadratureSample, Regime};

use super::{core_error, engine_columns, label, model_points, probe};
use crate::config::{ConfigError, EngineSelection, ExperimentConfig};
use crate::dataset::Column;
use crate::runner::{Cell, Plan};

/// Times evaluated together by one cell of the time-resolved experiments.
pub const TIMES_PER_CELL: usize = 100;

/// Stiffness of the oscillator on the current side of the critical point.
fn stiffness(params: &Params) -> f64 {
    match params.regime() {
        Regime::Superradiant => params.epsilon_g_alpha(),
        _ => params.epsilon_g(),
    }
}

fn closed_x_mean(params: &Params, t: f64) -> Result<f64, cqm_core::Error> {
    match params.regime() {
        Regime::Superradiant => closed_form::x_mean_beyond(params, t),
        _ => closed_form::x_mean(params, t),
    }
}

/// `⟨X⟩_t` against g at one time.
pub fn versus_g(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let engine = config.engine()?;
    let policy = config.cutoff_policy()?;
    let t = config.real("t")?;
    let mut cols = vec![
        Column::real("lambda", "omega"),
        Column::real("g", "1"),
        Column::real("g_c", "1"),
        Column::real("epsilon_g", "1"),
        Column::real("t", "1/omega"),
    ];
    if engine.includes(Engine::ClosedForm) {
        cols.push(Column::real("x_mean_closed", "1"));
    }
    if engine.includes(Engine::Oracle) {
        cols.push(Column::real("x_mean_oracle", "1"));
        cols.push(Column::index("n_cut"));
    }
    if engine == EngineSelection::Both {
        cols.push(Column::real("dev_x_mean", "1"));
    }
    let mut plan = Plan::new(cols);
    for params in model_points(config)? {
        plan.push(Cell::new(label(&params), move || {
            let mut row = vec![
                params.lambda,
                params.g,
                params.critical_coupling(),
                params.epsilon_g(),
                t,
            ];
            let mut closed = None;
            if engine.includes(Engine::ClosedForm) {
                let x = closed_x_mean(&params, t).map_err(core_error)?;
                row.push(x);
                closed = Some(x);
            }
            if engine.includes(Engine::Oracle) {
                let track = fock::quadrature_track_converged(OracleModel::Effective, &params, &probe(), &[t], &policy)
                    .map_err(core_error)?;
                let x = track.values[0].x_mean;
                row.extend([x, track.n_cut as f64]);
                if let Some(c) = closed {
                    // deviation relative to the oscillation amplitude (2ζ)^{-1/2}
                    row.push((c - x).abs() * (2.0 * stiffness(&params)).sqrt());
                }
            }
            Ok(vec![row])
        }));
    }
    Ok(plan)
}

const QUADRATURE_COLUMNS: [(&str, &str); 4] = [("x_mean", "1"), ("x_deriv_g", "1"), ("x_var", "1"), ("inv_var", "1")];

fn sample_values(s: &QuadratureSample) -> [f64; 4] {
    [s.x_mean, s.x_deriv_g, s.x_var, s.inv_var]
}

/// `I_g(τ_n)` with `n = max(1, ⌈t/τ₁⌉)`: the peak envelope the inverted
/// variance grows under.
fn peak_envelope(params: &Params, t: f64) -> Result<f64, cqm_core::Error> {
    let tau = closed_form::optimal_time(params, 1)?;
    let n = ((t / tau).ceil() as usize).max(1);
    closed_form::inverted_variance_peak(params, n)
}

/// `⟨X⟩_t`, `∂_g⟨X⟩_t`, `(ΔX)²` and `I_g(t)` along a time grid.
pub fn inverted_variance(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let engine = config.engine()?;
    let policy = config.cutoff_policy()?;
    let times = config.grid("t")?;
    let mut cols = vec![
        Column::real("g", "1"),
        Column::real("lambda", "omega"),
        Column::real("epsilon_g", "1"),
        Column::real("t", "1/omega"),
    ];
    for e in engine.engines() {
        cols.extend(engine_columns(e, &QUADRATURE_COLUMNS));
        if e == Engine::Oracle {
            cols.push(Column::index("n_cut"));
        }
    }
    if engine == EngineSelection::Both {
        cols.push(Column::real("dev_inv_var", "1"));
    }
    let mut plan = Plan::new(cols);
    for params in model_points(config)? {
        for chunk in times.chunks(TIMES_PER_CELL) {
            let chunk = chunk.to_vec();
            let name = format!("{} t={}..{}", label(&params), chunk[0], chunk[chunk.len() - 1]);
            plan.push(Cell::new(name, move || {
                let closed: Option<Vec<QuadratureSample>> = engine
                    .includes(Engine::ClosedForm)
                    .then(|| {
                        chunk
                            .iter()
                            .map(|&t| closed_form::quadrature_sample(&params, t))
                            .collect()
                    })
                    .transpose()
                    .map_err(core_error)?;
                let oracle = engine
                    .includes(Engine::Oracle)
                    .then(|| {
                        fock::quadrature_track_converged(OracleModel::Effective, &params, &probe(), &chunk, &policy)
                    })
                    .transpose()
                    .map_err(core_error)?;
                chunk
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| {
                        let mut row = vec![params.g, params.lambda, params.epsilon_g(), t];
                        if let Some(c) = &closed {
                            row.extend(sample_values(&c[k]));
                        }
                        if let Some(o) = &oracle {
                            row.extend(sample_values(&o.values[k]));
                            row.push(o.n_cut as f64);
                        }
                        if let (Some(c), Some(o)) = (&closed, &oracle) {
                            let scale = peak_envelope(&params, t).map_err(core_error)?;
                            row.push((c[k].inv_var - o.values[k].inv_var).abs() / scale);
                        }
                        Ok(row)
                    })
                    .collect()
            }));
        }
    }
    Ok(plan)
}
