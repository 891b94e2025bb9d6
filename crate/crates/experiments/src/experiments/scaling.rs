use cqm_core::closed_form;
use cqm_core::fock::{self, OracleModel};
use cqm_core::{Engine, Params};
use serde_json::{json, Value};

use super::{core_error, label, params, probe, rel_dev};
use crate::config::{ConfigError, EngineSelection, ExperimentConfig};
use crate::dataset::{Column, Dataset};
use crate::fit::fit_loglog_slope;
use crate::runner::{Cell, Plan};

/// Smallest frequency ratio accepted by the finite-frequency oracle.
pub const MIN_ETA: f64 = 10.0;

fn peak_labels(config: &ExperimentConfig) -> Result<Vec<usize>, ConfigError> {
    let n = config.counts("n")?;
    if n.contains(&0) {
        return Err(ConfigError::Value {
            key: "n".into(),
            reason: "peak labels start at 1".into(),
        });
    }
    Ok(n)
}

/// Log-log fits of `y` against `x` within each group of rows sharing the
/// values in `group` columns.
fn grouped_fits(data: &Dataset, group: &[&str], x: &str, ys: &[&str], abs: bool) -> Value {
    let Some(gi) = group.iter().map(|c| data.column_index(c)).collect::<Option<Vec<_>>>() else {
        return Value::Null;
    };
    let Some(xi) = data.column_index(x) else {
        return Value::Null;
    };
    let mut keys: Vec<Vec<f64>> = Vec::new();
    for row in &data.rows {
        let key: Vec<f64> = gi.iter().map(|&i| row[i]).collect();
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut fits = Vec::new();
    for key in keys {
        let rows: Vec<&Vec<f64>> = data
            .rows
            .iter()
            .filter(|r| gi.iter().zip(&key).all(|(&i, v)| r[i] == *v))
            .collect();
        for y in ys {
            let Some(yi) = data.column_index(y) else {
                continue;
            };
            let xs: Vec<f64> = rows.iter().map(|r| r[xi]).collect();
            let vs: Vec<f64> = rows.iter().map(|r| if abs { r[yi].abs() } else { r[yi] }).collect();
            let mut entry = serde_json::Map::new();
            for (name, v) in group.iter().zip(&key) {
                entry.insert(name.to_string(), json!(v));
            }
            entry.insert("y".into(), json!(y));
            match fit_loglog_slope(&xs, &vs) {
                Ok(fit) => {
                    entry.insert("slope".into(), json!(fit.slope));
                    entry.insert("stderr".into(), json!(fit.stderr));
                    entry.insert("points".into(), json!(fit.points));
                }
                Err(e) => {
                    entry.insert("error".into(), json!(e.to_string()));
                }
            }
            fits.push(Value::Object(entry));
        }
    }
    json!({ "fits": fits })
}

/// `I_g(τ_n)/F_g(τ_n)` against n, with the scaling factor
/// `1/(2 Var[P² − ε_g X²])` alongside.
pub fn ratio(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let engine = config.engine()?;
    let policy = config.cutoff_policy()?;
    let labels = peak_labels(config)?;
    let mut cols = vec![
        Column::real("g", "1"),
        Column::real("lambda", "omega"),
        Column::real("epsilon_g", "1"),
        Column::index("n"),
        Column::real("tau", "1/omega"),
        Column::real("ratio_limit", "1"),
    ];
    for e in engine.engines() {
        let s = e.as_str();
        cols.push(Column::real(&format!("inv_var_{s}"), "1"));
        cols.push(Column::real(&format!("f_g_{s}"), "1"));
        cols.push(Column::real(&format!("ratio_{s}"), "1"));
    }
    if engine.includes(Engine::Oracle) {
        cols.push(Column::index("n_cut"));
    }
    if engine == EngineSelection::Both {
        cols.push(Column::real("rel_dev_ratio", "1"));
    }
    let mut plan = Plan::new(cols);
    for params in super::model_points(config)? {
        for &n in &labels {
            plan.push(Cell::new(format!("{} n={n}", label(&params)), move || {
                let probe = probe();
                let tau = closed_form::optimal_time(&params, n).map_err(core_error)?;
                let limit = closed_form::ig_fg_ratio(&probe, &params).map_err(core_error)?;
                let mut row = vec![params.g, params.lambda, params.epsilon_g(), n as f64, tau, limit];
                let mut closed = None;
                if engine.includes(Engine::ClosedForm) {
                    let i = closed_form::inverted_variance(&params, tau).map_err(core_error)?;
                    let f = closed_form::qfi_g_any(&probe, &params, tau).map_err(core_error)?.value;
                    row.extend([i, f, i / f]);
                    closed = Some(i / f);
                }
                if engine.includes(Engine::Oracle) {
                    let track =
                        fock::quadrature_track_converged(OracleModel::Effective, &params, &probe, &[tau], &policy)
                            .map_err(core_error)?;
                    let qfi = fock::generator_qfi_converged(&params, tau, &probe, &policy).map_err(core_error)?;
                    let i = track.values[0].inv_var;
                    row.extend([i, qfi.values, i / qfi.values, track.n_cut.max(qfi.n_cut) as f64]);
                    if let Some(c) = closed {
                        row.push(rel_dev(c, i / qfi.values));
                    }
                }
                Ok(vec![row])
            }));
        }
    }
    Ok(plan.with_summary(|data| grouped_fits(data, &["g", "lambda"], "n", &["ratio_closed", "ratio_oracle"], false)))
}

/// Relative discrepancy δ of the spin-boson inverted variance at `τ_n` from
/// the low-frequency peak, against the frequency ratio η.
pub fn frequency(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    config.engine()?;
    let policy = config.cutoff_policy()?;
    let labels = peak_labels(config)?;
    let omega = config.real("omega")?;
    let etas = config.grid("eta")?;
    if let Some(eta) = etas.iter().find(|e| !(**e >= MIN_ETA)) {
        return Err(ConfigError::Value {
            key: "eta".into(),
            reason: format!("{eta} is below {MIN_ETA}"),
        });
    }
    let mut points: Vec<(Params, f64)> = Vec::new();
    for (g, lambda) in super::coupling_points(config)? {
        for &eta in &etas {
            points.push((params(omega, eta, g, lambda)?, eta));
        }
    }
    let mut plan = Plan::new(vec![
        Column::real("g", "1"),
        Column::real("lambda", "omega"),
        Column::real("eta", "1"),
        Column::index("n"),
        Column::real("tau", "1/omega"),
        Column::real("inv_var_finite", "1"),
        Column::real("inv_var_limit", "1"),
        Column::real("delta", "1"),
        Column::index("n_cut"),
        Column::real("dg", "1"),
    ]);
    for (p, eta) in points {
        for &n in &labels {
            plan.push(Cell::new(format!("{} eta={eta} n={n}", label(&p)), move || {
                let d = fock::finite_frequency_discrepancy(&p, eta, n, &policy).map_err(core_error)?;
                Ok(vec![vec![
                    p.g,
                    p.lambda,
                    d.eta,
                    n as f64,
                    d.tau,
                    d.inv_var_finite,
                    d.inv_var_limit,
                    d.delta,
                    d.n_cut as f64,
                    d.dg,
                ]])
            }));
        }
    }
    Ok(plan.with_summary(|data| grouped_fits(data, &["g", "lambda", "n"], "eta", &["delta"], true)))
}
