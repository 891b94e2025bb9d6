use cqm_core::lindblad;
use cqm_core::{BosonState, DecayRates, Engine, MomentVector, Params};
use serde_json::{json, Value};

use super::{core_error, engine_columns, label, model_points, rel_dev};
use crate::config::{ConfigError, EngineSelection, ExperimentConfig};
use crate::dataset::{Column, Dataset};
use crate::runner::{Cell, CellOutput, Plan};

const COLUMNS: [(&str, &str); 4] = [("x_mean", "1"), ("x_deriv_g", "1"), ("x_var", "1"), ("inv_var", "1")];

/// Coupling step of the centered difference for `∂_g⟨X⟩_t`.
fn coupling_step(g: f64) -> f64 {
    1e-5 * g.abs().max(0.01)
}

/// Integration grid starting at 0 and whether the caller's grid lacks it.
fn integration_grid(times: &[f64]) -> (Vec<f64>, bool) {
    if times[0] == 0.0 {
        (times.to_vec(), false)
    } else {
        (std::iter::once(0.0).chain(times.iter().copied()).collect(), true)
    }
}

fn integrate(params: &Params, rates: &DecayRates, grid: &[f64]) -> Result<Vec<MomentVector>, cqm_core::Error> {
    let m0 = MomentVector::from_boson_state(&BosonState::zero_plus_i_one());
    Ok(lindblad::integrate_moments(&m0, params, rates, grid)?
        .into_iter()
        .map(|s| s.moments)
        .collect())
}

/// `[⟨X⟩, ∂_g⟨X⟩, (ΔX)², I_g]` from moment integration, the derivative by a
/// centered difference in g.
fn integrated_samples(params: &Params, rates: &DecayRates, times: &[f64]) -> Result<Vec<[f64; 4]>, cqm_core::Error> {
    let (grid, padded) = integration_grid(times);
    let dg = coupling_step(params.g);
    let shifted = |g: f64| Params::new(params.omega, params.qubit_omega, g, params.lambda);
    let mid = integrate(params, rates, &grid)?;
    let up = integrate(&shifted(params.g + dg)?, rates, &grid)?;
    let down = integrate(&shifted(params.g - dg)?, rates, &grid)?;
    let skip = usize::from(padded);
    Ok((skip..grid.len())
        .map(|k| {
            let d = (up[k].x - down[k].x) / (2.0 * dg);
            let var = mid[k].x_variance();
            [mid[k].x, d, var, d * d / var]
        })
        .collect())
}

fn closed_samples(params: &Params, rates: &DecayRates, times: &[f64]) -> Result<Vec<[f64; 4]>, cqm_core::Error> {
    times
        .iter()
        .map(|&t| {
            let s = lindblad::dissipative_sample(params, rates, t)?;
            Ok([s.x_mean, s.x_deriv_g, s.x_var, s.inv_var])
        })
        .collect()
}

fn track(params: &Params, rates: &DecayRates, times: &[f64], engine: EngineSelection) -> CellOutput {
    let closed = engine
        .includes(Engine::ClosedForm)
        .then(|| closed_samples(params, rates, times))
        .transpose()
        .map_err(core_error)?;
    let oracle = engine
        .includes(Engine::Oracle)
        .then(|| integrated_samples(params, rates, times))
        .transpose()
        .map_err(core_error)?;
    // deviations relative to the undamped oscillation amplitude and to the
    // largest closed-form inverted variance along the track
    let amplitude = (2.0 * params.epsilon_g()).sqrt().recip();
    let peak = closed
        .as_ref()
        .map(|c| c.iter().map(|s| s[3]).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Ok(times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![
                params.g,
                params.lambda,
                rates.gamma_plus(),
                rates.gamma_minus(),
                params.epsilon_g(),
                t,
            ];
            if let Some(c) = &closed {
                row.extend(c[k]);
            }
            if let Some(o) = &oracle {
                row.extend(o[k]);
            }
            if let (Some(c), Some(o)) = (&closed, &oracle) {
                row.push((c[k][0] - o[k][0]).abs() / amplitude);
                row.push(rel_dev(c[k][2], o[k][2]));
                row.push(if peak > 0.0 {
                    (c[k][3] - o[k][3]).abs() / peak
                } else {
                    0.0
                });
            }
            row
        })
        .collect())
}

/// `⟨X⟩_t`, `∂_g⟨X⟩_t`, `(ΔX)²` and `I_g(t)` under decay and heating, one
/// cell per `(g, λ)` point.
pub fn plan(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let engine = config.engine()?;
    let times = config.grid("t")?;
    if times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConfigError::Value {
            key: "t".into(),
            reason: "times must be non-negative and strictly increasing".into(),
        });
    }
    let rates = DecayRates::from_sum_difference(config.real("gamma_plus")?, config.real("gamma_minus")?)?;
    if engine.includes(Engine::ClosedForm) && rates.gamma_minus() < 0.0 {
        return Err(ConfigError::Value {
            key: "gamma_minus".into(),
            reason: "the closed engine needs gamma_minus >= 0; use --engine oracle".into(),
        });
    }
    let mut cols = vec![
        Column::real("g", "1"),
        Column::real("lambda", "omega"),
        Column::real("gamma_plus", "omega"),
        Column::real("gamma_minus", "omega"),
        Column::real("epsilon_g", "1"),
        Column::real("t", "1/omega"),
    ];
    for e in engine.engines() {
        cols.extend(engine_columns(e, &COLUMNS));
    }
    if engine == EngineSelection::Both {
        cols.push(Column::real("dev_x_mean", "1"));
        cols.push(Column::real("rel_dev_x_var", "1"));
        cols.push(Column::real("dev_inv_var", "1"));
    }
    let mut plan = Plan::new(cols);
    for params in model_points(config)? {
        let times = times.clone();
        plan.push(Cell::new(label(&params), move || {
            track(&params, &rates, &times, engine)
        }));
    }
    Ok(plan.with_summary(peaks))
}

/// Largest inverted variance of each `(g, λ)` track and the time it occurs.
fn peaks(data: &Dataset) -> Value {
    let value = ["inv_var_closed", "inv_var_oracle"]
        .into_iter()
        .find_map(|name| data.column_index(name));
    let (Some(v), Some(c), Some(g), Some(l), Some(t)) = (
        value,
        data.column_index("cell"),
        data.column_index("g"),
        data.column_index("lambda"),
        data.column_index("t"),
    ) else {
        return Value::Null;
    };
    let peaks: Vec<Value> = data
        .rows
        .chunk_by(|a, b| a[c] == b[c])
        .filter_map(|rows| rows.iter().max_by(|a, b| a[v].total_cmp(&b[v])))
        .map(|r| json!({"g": r[g], "lambda": r[l], "t_peak": r[t], "inv_var_peak": r[v]}))
        .collect();
    json!({ "peaks": peaks })
}
