//! The eight experiments: their keys, supported engines and cell plans.

mod decoherence;
mod qfi;
mod quadrature;
mod scaling;

use cqm_core::{BosonState, Engine, Params};

use crate::config::{ConfigError, EngineSelection, ExperimentConfig, ExperimentId};
use crate::dataset::Column;
use crate::runner::Plan;

/// One configuration key with its default and a one-line description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(key: &'static str, default: &'static str, doc: &'static str) -> KeySpec {
    KeySpec { key, default, doc }
}

const OMEGA: KeySpec = key("omega", "1", "boson frequency ω; times are in units of 1/ω");
const ETA: KeySpec = key("eta", "1000", "frequency ratio Ω/ω");
const OUT: KeySpec = key("out", "", "output CSV path (default: $CQM_OUT_DIR/<experiment>.csv)");
const PAIRING: KeySpec = key(
    "pairing",
    "product",
    "combine the g and lambda grids as a product or zip them (a single value broadcasts)",
);
const CUTOFF: [KeySpec; 3] = [
    key("cutoff.start", "32", "first Fock cutoff tried by the oracle"),
    key("cutoff.max", "4096", "largest Fock cutoff tried by the oracle"),
    key(
        "cutoff.tolerance",
        "1e-6",
        "accepted scale-relative change of the observables when the cutoff doubles",
    ),
];

fn engine_key(default: &'static str) -> KeySpec {
    key("engine", default, "closed, oracle or both")
}

pub fn summary(id: ExperimentId) -> &'static str {
    match id {
        ExperimentId::QfiEvolution => "QFI about g against time near the critical point",
        ExperimentId::QfiVsG => "QFI about g against g at fixed time for several lambda",
        ExperimentId::QfiMap => "log10 of the QFI about g on a dense lambda-g grid",
        ExperimentId::QuadratureVsG => "<X>_t against g at fixed time for several lambda",
        ExperimentId::InvertedVariance => "<X>_t, its g-derivative, (ΔX)² and the inverted variance against time",
        ExperimentId::RatioScaling => "inverted variance over QFI at the optimal times τ_n",
        ExperimentId::FrequencyScaling => {
            "finite-frequency discrepancy of the inverted variance peak against Ω/ω (spin-boson oracle)"
        }
        ExperimentId::Decoherence => {
            "inverted variance under decay and heating: printed solutions (closed) and moment integration (oracle)"
        }
    }
}

pub fn engines(id: ExperimentId) -> &'static [EngineSelection] {
    const ALL: [EngineSelection; 3] = [EngineSelection::Closed, EngineSelection::Oracle, EngineSelection::Both];
    match id {
        ExperimentId::QfiMap => &[EngineSelection::Closed],
        ExperimentId::FrequencyScaling => &[EngineSelection::Oracle],
        _ => &ALL,
    }
}

pub fn keys(id: ExperimentId) -> Vec<KeySpec> {
    let mut keys = match id {
        ExperimentId::QfiEvolution => vec![
            key("g", "0.097,0.098,0.099", "couplings g"),
            key("lambda", "-0.2475", "quadratic-term strengths λ (energy units)"),
            PAIRING,
            key("t", "0:1000:200", "times"),
            engine_key("closed"),
        ],
        ExperimentId::QfiVsG => vec![
            key("g", "0.0025:1.4975:300", "couplings g"),
            key("lambda", "0,-0.05,-0.1,-0.15,-0.2", "quadratic-term strengths λ"),
            PAIRING,
            key("t", "1000", "evolution time"),
            engine_key("closed"),
        ],
        ExperimentId::QfiMap => vec![
            key("g", "0.0025:1.4975:300", "couplings g (at most 512 values)"),
            key(
                "lambda",
                "-0.2475:0.25:200",
                "quadratic-term strengths λ (at most 512 values)",
            ),
            key("t", "1000", "evolution time"),
            engine_key("closed"),
        ],
        ExperimentId::QuadratureVsG => vec![
            key("g", "0.0025:1.4975:300", "couplings g"),
            key("lambda", "0,-0.2,-0.247", "quadratic-term strengths λ"),
            PAIRING,
            key("t", "75", "evolution time"),
            engine_key("closed"),
        ],
        ExperimentId::InvertedVariance => vec![
            key("g", "0.9,0.1,0.1", "couplings g"),
            key("lambda", "0,0,-0.247", "quadratic-term strengths λ"),
            key("pairing", "zip", PAIRING.doc),
            key("t", "0:300:3001", "times"),
            engine_key("both"),
        ],
        ExperimentId::RatioScaling => vec![
            key("g", "0.9,0.1", "couplings g"),
            key("lambda", "0,-0.247", "quadratic-term strengths λ"),
            key("pairing", "zip", PAIRING.doc),
            key("n", "1:20:20", "peak labels n of the optimal times τ_n"),
            engine_key("both"),
        ],
        ExperimentId::FrequencyScaling => vec![
            key("g", "0.9,0.1", "couplings g"),
            key("lambda", "0,-0.247", "quadratic-term strengths λ"),
            key("pairing", "zip", PAIRING.doc),
            key(
                "eta",
                "100,300,1000,3000,10000",
                "frequency ratios Ω/ω (each at least 10)",
            ),
            key("n", "1", "peak labels n of the optimal times τ_n"),
            engine_key("oracle"),
        ],
        ExperimentId::Decoherence => vec![
            key("g", "0.1,0.1", "couplings g"),
            key("lambda", "-0.247,0", "quadratic-term strengths λ"),
            key("pairing", "zip", PAIRING.doc),
            key("gamma_plus", "0.03", "γ_a + γ_h"),
            key("gamma_minus", "0.01", "γ_a − γ_h"),
            key("t", "0:1500:3001", "times (non-negative, increasing)"),
            engine_key("both"),
        ],
    };
    keys.push(OMEGA);
    if id != ExperimentId::FrequencyScaling {
        keys.push(ETA);
    }
    if !matches!(id, ExperimentId::QfiMap | ExperimentId::Decoherence) {
        keys.extend(CUTOFF);
    }
    keys.push(OUT);
    keys
}

pub fn plan(config: &ExperimentConfig) -> Result<Plan, ConfigError> {
    match config.experiment {
        ExperimentId::QfiEvolution => qfi::evolution(config),
        ExperimentId::QfiVsG => qfi::versus_g(config),
        ExperimentId::QfiMap => qfi::map(config),
        ExperimentId::QuadratureVsG => quadrature::versus_g(config),
        ExperimentId::InvertedVariance => quadrature::inverted_variance(config),
        ExperimentId::RatioScaling => scaling::ratio(config),
        ExperimentId::FrequencyScaling => scaling::frequency(config),
        ExperimentId::Decoherence => decoherence::plan(config),
    }
}

fn probe() -> BosonState {
    BosonState::zero_plus_i_one()
}

/// Validated parameters for one `(g, λ)` point at ratio `eta`.
fn params(omega: f64, eta: f64, g: f64, lambda: f64) -> Result<Params, ConfigError> {
    Ok(Params::new(omega, eta * omega, g, lambda)?)
}

/// `(g, λ)` points from the `g`, `lambda` and `pairing` keys; the product
/// runs over λ first.
fn coupling_points(config: &ExperimentConfig) -> Result<Vec<(f64, f64)>, ConfigError> {
    let g = config.grid("g")?;
    let lambda = config.grid("lambda")?;
    match config.get("pairing") {
        "product" => Ok(lambda.iter().flat_map(|&l| g.iter().map(move |&g| (g, l))).collect()),
        "zip" => {
            let n = g.len().max(lambda.len());
            let pick = |v: &[f64], k: usize| if v.len() == 1 { v[0] } else { v[k] };
            if (g.len() != n && g.len() != 1) || (lambda.len() != n && lambda.len() != 1) {
                return Err(ConfigError::Value {
                    key: "pairing".into(),
                    reason: format!("zip needs equal lengths, got {} g and {} lambda", g.len(), lambda.len()),
                });
            }
            Ok((0..n).map(|k| (pick(&g, k), pick(&lambda, k))).collect())
        }
        other => Err(ConfigError::Value {
            key: "pairing".into(),
            reason: format!("expected product or zip, got `{other}`"),
        }),
    }
}

/// Validated model parameters for every `(g, λ)` point.
fn model_points(config: &ExperimentConfig) -> Result<Vec<Params>, ConfigError> {
    let omega = config.real("omega")?;
    let eta = config.real("eta")?;
    coupling_points(config)?
        .into_iter()
        .map(|(g, lambda)| params(omega, eta, g, lambda))
        .collect()
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn engine_columns(engine: Engine, names: &[(&str, &str)]) -> Vec<Column> {
    names
        .iter()
        .map(|(name, unit)| Column::real(&format!("{name}_{}", engine.as_str()), unit))
        .collect()
}

fn label(params: &Params) -> String {
    format!("g={} lambda={}", params.g, params.lambda)
}

fn core_error(e: cqm_core::Error) -> String {
    e.to_string()
}
