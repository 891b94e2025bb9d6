use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cqm_experiments::config::reference;
use cqm_experiments::runner::{run, RunError};
use cqm_experiments::{ConfigError, Dataset, ExperimentConfig, ExperimentId};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Regenerates the datasets of the critical-metrology experiments.
///
/// `cqm reference [experiment]` lists every experiment and its keys.
#[derive(Debug, Parser)]
#[command(name = "cqm", version)]
struct Cli {
    /// Experiment id, or `reference`.
    experiment: String,
    /// Experiment to describe when the first argument is `reference`.
    topic: Option<String>,
    /// TOML config file; nested tables give dotted keys such as `cutoff.max`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// closed, oracle or both; overrides the config.
    #[arg(long)]
    engine: Option<String>,
    /// `key=value` override applied after the config file; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Recompute every cell even when the output holds a finished run of the
    /// same configuration.
    #[arg(long)]
    fresh: bool,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("cqm: {msg}");
    ExitCode::from(code)
}

fn load_config(cli: &Cli, id: ExperimentId) -> Result<ExperimentConfig, ConfigError> {
    let path = cli.config.as_ref().ok_or_else(|| ConfigError::Value {
        key: "--config".into(),
        reason: "a config file is required".into(),
    })?;
    let mut config = ExperimentConfig::from_file(id, path)?;
    if let Some(engine) = &cli.engine {
        config.set("engine", engine)?;
    }
    for pair in &cli.set {
        config.set_pair(pair)?;
    }
    config.engine()?;
    Ok(config)
}

fn output_path(cli: &Cli, config: &ExperimentConfig) -> PathBuf {
    cli.out.clone().or_else(|| config.out()).unwrap_or_else(|| {
        let root = std::env::var_os("CQM_OUT_DIR").map_or_else(|| PathBuf::from("results"), PathBuf::from);
        root.join(format!("{}.csv", config.experiment))
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.experiment == "reference" {
        let topic = match cli.topic.as_deref().map(str::parse::<ExperimentId>).transpose() {
            Ok(topic) => topic,
            Err(e) => return fail(EXIT_CONFIG, e),
        };
        print!("{}", reference(topic));
        return ExitCode::SUCCESS;
    }
    if let Some(topic) = &cli.topic {
        return fail(EXIT_CONFIG, format!("unexpected argument `{topic}`"));
    }
    let id = match cli.experiment.parse::<ExperimentId>() {
        Ok(id) => id,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let config = match load_config(&cli, id) {
        Ok(config) => config,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let out = output_path(&cli, &config);
    let previous = if cli.fresh || !out.exists() {
        None
    } else {
        Dataset::read(&out).ok()
    };
    let outcome = match run(&config, cli.jobs, previous.as_ref()) {
        Ok(outcome) => outcome,
        Err(RunError::Config(e)) => return fail(EXIT_CONFIG, e),
        Err(e) => return fail(EXIT_IO, e),
    };
    if let Err(e) = outcome.dataset.write(&out) {
        return fail(EXIT_IO, e);
    }
    eprintln!(
        "cqm: {id}: {} rows to {} ({} cells computed, {} reused, {} failed)",
        outcome.dataset.rows.len(),
        out.display(),
        outcome.computed,
        outcome.reused,
        outcome.failed.len()
    );
    for f in &outcome.failed {
        eprintln!("cqm: cell {} ({}) failed: {}", f.cell, f.label, f.error);
    }
    if outcome.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}
