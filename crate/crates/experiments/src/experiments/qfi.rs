use cqm_core::closed_form;
use cqm_core::fock::{self, CutoffPolicy};
use cqm_core::{Engine, Params, Regime};
use serde_json::{json, Value};

use super::{core_error, label, model_points, params, probe, rel_dev};
use crate::config::{ConfigError, EngineSelection, ExperimentConfig};
use crate::dataset::{Column, Dataset};
use crate::runner::{Cell, CellOutput, Plan};

/// Largest number of grid values per axis of the map.
pub const MAX_MAP_AXIS: usize = 512;

/// Closed-form `F_g` on either side of the critical point; exactly at it the
/// `ε_g → 0` limit is returned and flagged as saturated.
fn closed_qfi(params: &Params, t: f64) -> Result<(f64, bool), cqm_core::Error> {
    let probe = probe();
    if params.regime() == Regime::Critical {
        return Ok((closed_form::qfi_g_critical_limit(&probe, params, t)?, true));
    }
    Ok((closed_form::qfi_g_any(&probe, params, t)?.value, false))
}

fn point_columns(engine: EngineSelection) -> Vec<Column> {
    let mut cols = vec![
        Column::real("lambda", "omega"),
        Column::real("g", "1"),
        Column::real("g_c", "1"),
        Column::real("epsilon_g", "1"),
        Column::real("t", "1/omega"),
    ];
    if engine.includes(Engine::ClosedForm) {
        cols.push(Column::real("f_g_closed", "1"));
        cols.push(Column::index("saturated"));
    }
    if engine.includes(Engine::Oracle) {
        cols.push(Column::real("f_g_oracle", "1"));
        cols.push(Column::index("n_cut"));
    }
    if engine == EngineSelection::Both {
        cols.push(Column::real("rel_dev_f_g", "1"));
    }
    cols
}

fn point_row(params: &Params, t: f64, engine: EngineSelection, policy: &CutoffPolicy) -> CellOutput {
    let mut row = vec![
        params.lambda,
        params.g,
        params.critical_coupling(),
        params.epsilon_g(),
        t,
    ];
    let mut closed = None;
    if engine.includes(Engine::ClosedForm) {
        let (value, saturated) = closed_qfi(params, t).map_err(core_error)?;
        row.extend([value, if saturated { 1.0 } else { 0.0 }]);
        closed = Some(value);
    }
    if engine.includes(Engine::Oracle) {
        let exact = fock::generator_qfi_converged(params, t, &probe(), policy).map_err(core_error)?;
        row.extend([exact.values, exact.n_cut as f64]);
        if let Some(c) = closed {
            row.push(rel_dev(c, exact.values));
        }
    }
    Ok(vec![row])
}

fn point_plan(config: &ExperimentConfig, points: Vec<(Params, f64)>) -> Result<Plan, ConfigError> {
    let engine = config.engine()?;
    let policy = config.cutoff_policy()?;
    let mut plan = Plan::new(point_columns(engine));
    for (params, t) in points {
        plan.push(Cell::new(format!("{} t={t}", label(&params)), move || {
            point_row(&params, t, engine, &policy)
        }));
    }
    Ok(plan)
}

/// `F_g(t)` for each `(g, λ)` point.
pub fn evolution(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let times = config.grid("t")?;
    let points = model_points(config)?
        .into_iter()
        .flat_map(|p| times.iter().map(move |&t| (p, t)))
        .collect();
    point_plan(config, points)
}

/// `F_g` against g at one time, with the peak of each λ curve summarized.
pub fn versus_g(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    let t = config.real("t")?;
    let points = model_points(config)?.into_iter().map(|p| (p, t)).collect();
    Ok(point_plan(config, points)?.with_summary(peaks_by_lambda))
}

/// Location of the largest `F_g` along each λ curve.
fn peaks_by_lambda(data: &Dataset) -> Value {
    let value_col = ["f_g_closed", "f_g_oracle"]
        .into_iter()
        .find_map(|name| data.column_index(name));
    let (Some(v), Some(l), Some(g), Some(gc)) = (
        value_col,
        data.column_index("lambda"),
        data.column_index("g"),
        data.column_index("g_c"),
    ) else {
        return Value::Null;
    };
    let mut peaks: Vec<(f64, f64, f64, f64)> = Vec::new();
    for row in &data.rows {
        match peaks.iter_mut().find(|p| p.0 == row[l]) {
            Some(p) if row[v] > p.3 => *p = (row[l], row[g], row[gc], row[v]),
            Some(_) => {}
            None => peaks.push((row[l], row[g], row[gc], row[v])),
        }
    }
    json!({
        "peaks": peaks
            .iter()
            .map(|(l, g, gc, v)| json!({"lambda": l, "g_peak": g, "g_c": gc, "f_g_peak": v}))
            .collect::<Vec<_>>()
    })
}

/// Dense λ–g map of `log₁₀ F_g`, one cell per λ row.
pub fn map(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    config.engine()?;
    let omega = config.real("omega")?;
    let eta = config.real("eta")?;
    let t = config.real("t")?;
    let gs = config.grid("g")?;
    let lambdas = config.grid("lambda")?;
    for (key, len) in [("g", gs.len()), ("lambda", lambdas.len())] {
        if len > MAX_MAP_AXIS {
            return Err(ConfigError::Value {
                key: key.into(),
                reason: format!("{len} values exceed the map limit of {MAX_MAP_AXIS}"),
            });
        }
    }
    let mut plan = Plan::new(vec![
        Column::real("lambda", "omega"),
        Column::real("g", "1"),
        Column::real("g_c", "1"),
        Column::real("epsilon_g", "1"),
        Column::real("log10_f_g", "1"),
        Column::index("saturated"),
    ]);
    for lambda in lambdas {
        let row: Vec<Params> = gs
            .iter()
            .map(|&g| params(omega, eta, g, lambda))
            .collect::<Result<_, _>>()?;
        plan.push(Cell::new(format!("lambda={lambda}"), move || {
            row.iter()
                .map(|p| {
                    let (value, saturated) = closed_qfi(p, t).map_err(core_error)?;
                    Ok(vec![
                        p.lambda,
                        p.g,
                        p.critical_coupling(),
                        p.epsilon_g(),
                        value.log10(),
                        if saturated { 1.0 } else { 0.0 },
                    ])
                })
                .collect()
        }));
    }
    Ok(plan.with_summary(ridge))
}

/// Largest distance, in g-grid cells, between the maximum of each λ row
/// and the grid point nearest `g_c(λ)`.
fn ridge(data: &Dataset) -> Value {
    let (Some(l), Some(g), Some(gc), Some(v)) = (
        data.column_index("lambda"),
        data.column_index("g"),
        data.column_index("g_c"),
        data.column_index("log10_f_g"),
    ) else {
        return Value::Null;
    };
    let mut worst = 0usize;
    let mut rows = 0usize;
    for chunk in data.rows.chunk_by(|a, b| a[l] == b[l]) {
        let peak = (0..chunk.len())
            .max_by(|&a, &b| chunk[a][v].total_cmp(&chunk[b][v]))
            .unwrap_or(0);
        let offset = |r: &Vec<f64>| (r[g] - r[gc]).abs();
        let nearest = (0..chunk.len())
            .min_by(|&a, &b| offset(&chunk[a]).total_cmp(&offset(&chunk[b])))
            .unwrap_or(0);
        worst = worst.max(peak.abs_diff(nearest));
        rows += 1;
    }
    json!({"ridge_max_cell_offset": worst, "rows": rows})
}
