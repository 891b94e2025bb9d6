use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, ExperimentConfig, ExperimentId};
use crate::dataset::{Column, Dataset, WALL_TIME_KEY};
use crate::experiments;

/// Rows produced by one grid cell, without the leading `cell` column.
pub type CellOutput = Result<Vec<Vec<f64>>, String>;

type Job = Box<dyn Fn() -> CellOutput + Send + Sync>;
type Summary = Box<dyn Fn(&Dataset) -> Value + Send + Sync>;

/// Independent unit of work.
pub struct Cell {
    pub label: String,
    job: Job,
}

impl Cell {
    pub fn new(label: impl Into<String>, job: impl Fn() -> CellOutput + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            job: Box::new(job),
        }
    }
}

/// Everything needed to fill a dataset: its schema, its cells and an
/// optional summary of the finished rows.
pub struct Plan {
    pub columns: Vec<Column>,
    pub cells: Vec<Cell>,
    pub summarize: Option<Summary>,
}

impl Plan {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            cells: Vec::new(),
            summarize: None,
        }
    }

    pub fn push(&mut self, cell: Cell) {
        self.cells.push(cell);
    }

    pub fn with_summary(mut self, f: impl Fn(&Dataset) -> Value + Send + Sync + 'static) -> Self {
        self.summarize = Some(Box::new(f));
        self
    }

    /// Schema of the written dataset: `cell` followed by the plan's columns.
    pub fn schema(&self) -> Vec<Column> {
        std::iter::once(Column::index("cell"))
            .chain(self.columns.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedCell {
    pub cell: usize,
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dataset: Dataset,
    pub failed: Vec<FailedCell>,
    /// Cells evaluated in this run.
    pub computed: usize,
    /// Cells copied from a previous run of the same configuration.
    pub reused: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("{0} is not a map sweep")]
    NotAMap(ExperimentId),
}

/// `jobs`, or the available parallelism when `jobs` is 0.
pub fn worker_count(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

fn evaluate(cell: &Cell, width: usize) -> CellOutput {
    let rows = match catch_unwind(AssertUnwindSafe(|| (cell.job)())) {
        Ok(result) => result?,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            return Err(format!("panicked: {msg}"));
        }
    };
    for row in &rows {
        if row.len() != width {
            return Err(format!("row has {} values, schema has {width}", row.len()));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(format!("non-finite value {v}"));
        }
    }
    Ok(rows)
}

/// Rows of every evaluated cell, prefixed by the cell index, and the cells
/// that failed.
#[derive(Debug)]
pub struct Execution {
    pub rows: Vec<Vec<f64>>,
    pub failed: Vec<FailedCell>,
    /// Cells computed rather than reused.
    pub computed: usize,
}

/// Evaluates every cell not found in `reusable` on a pool of `jobs` workers.
/// Rows come back ordered by cell index whatever the scheduling.
pub fn execute(plan: &Plan, jobs: usize, reusable: &BTreeMap<usize, Vec<Vec<f64>>>) -> Result<Execution, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(jobs))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let width = plan.columns.len();
    let pending: Vec<usize> = (0..plan.cells.len()).filter(|k| !reusable.contains_key(k)).collect();
    let fresh: Vec<(usize, CellOutput)> = pool.install(|| {
        pending
            .par_iter()
            .map(|&k| (k, evaluate(&plan.cells[k], width)))
            .collect()
    });
    let computed = fresh.len();
    let mut results: BTreeMap<usize, CellOutput> = fresh.into_iter().collect();
    for (k, rows) in reusable {
        if *k < plan.cells.len() {
            results.insert(*k, Ok(rows.clone()));
        }
    }
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for (k, result) in results {
        match result {
            Ok(cell_rows) => rows.extend(cell_rows.into_iter().map(|r| {
                let mut full = Vec::with_capacity(r.len() + 1);
                full.push(k as f64);
                full.extend(r);
                full
            })),
            Err(error) => failed.push(FailedCell {
                cell: k,
                label: plan.cells[k].label.clone(),
                error,
            }),
        }
    }
    Ok(Execution { rows, failed, computed })
}

fn engine_versions() -> Value {
    json!({
        "cqm-core": cqm_core::VERSION,
        "cqm-experiments": env!("CARGO_PKG_VERSION"),
    })
}

/// Rows of `previous` grouped by cell, provided it was produced by the same
/// configuration, schema and engine versions.
fn reusable_rows(previous: Option<&Dataset>, config: &Value, schema: &[Column]) -> BTreeMap<usize, Vec<Vec<f64>>> {
    let mut out: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
    let Some(prev) = previous else {
        return out;
    };
    let same = prev.metadata.get("config") == Some(config)
        && prev.metadata.get("engine_versions") == Some(&engine_versions())
        && prev.columns == schema;
    if !same {
        return out;
    }
    for row in &prev.rows {
        out.entry(row[0] as usize).or_default().push(row[1..].to_vec());
    }
    out
}

/// Runs one experiment. Cells that fail are recorded in the metadata and
/// the run continues. With `previous` from the same configuration only the
/// cells missing from it are evaluated.
pub fn run(config: &ExperimentConfig, jobs: usize, previous: Option<&Dataset>) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let plan = experiments::plan(config)?;
    let config_json = config.to_json();
    let schema = plan.schema();
    let reusable = reusable_rows(previous, &config_json, &schema);
    let Execution { rows, failed, computed } = execute(&plan, jobs, &reusable)?;
    let mut dataset = Dataset::new(schema);
    dataset.rows = rows;
    let mut meta = Map::new();
    meta.insert("experiment".into(), Value::from(config.experiment.as_str()));
    meta.insert("config".into(), config_json);
    meta.insert("engine_versions".into(), engine_versions());
    meta.insert("cells".into(), Value::from(plan.cells.len()));
    meta.insert(
        "failed_cells".into(),
        Value::Array(
            failed
                .iter()
                .map(|f| json!({"cell": f.cell, "label": f.label, "error": f.error}))
                .collect(),
        ),
    );
    if let Some(n_cut) = dataset.column("n_cut") {
        let lo = n_cut.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = n_cut.iter().cloned().fold(0.0, f64::max);
        if lo.is_finite() {
            meta.insert("n_cut_range".into(), json!([lo as u64, hi as u64]));
        }
    }
    if let Some(summarize) = &plan.summarize {
        meta.insert("summary".into(), summarize(&dataset));
    }
    meta.insert(WALL_TIME_KEY.into(), json!(start.elapsed().as_secs_f64()));
    dataset.metadata = meta;
    Ok(RunOutcome {
        dataset,
        failed,
        computed,
        reused: reusable.len().min(plan.cells.len()),
    })
}

/// The dense λ–g map of `log₁₀ F_g`.
pub fn sweep_map(config: &ExperimentConfig, jobs: usize) -> Result<RunOutcome, RunError> {
    if config.experiment != ExperimentId::QfiMap {
        return Err(RunError::NotAMap(config.experiment));
    }
    run(config, jobs, None)
}
