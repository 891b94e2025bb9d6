use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cqm_core::fock::CutoffPolicy;
use cqm_core::Engine;
use serde_json::Value;

use crate::experiments::{self, KeySpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid TOML: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("expected `key=value`, got `{0}`")]
    Override(String),
    #[error("unknown key `{key}` for {experiment} (see `cqm reference {experiment}`)")]
    UnknownKey { key: String, experiment: &'static str },
    #[error("key `{key}`: {reason}")]
    Value { key: String, reason: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("{experiment} does not support engine `{engine}`")]
    Engine {
        experiment: &'static str,
        engine: &'static str,
    },
    #[error("invalid model parameters: {0}")]
    Model(#[from] cqm_core::Error),
}

fn value_error(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    QfiEvolution,
    QfiVsG,
    QfiMap,
    QuadratureVsG,
    InvertedVariance,
    RatioScaling,
    FrequencyScaling,
    Decoherence,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::QfiEvolution,
        ExperimentId::QfiVsG,
        ExperimentId::QfiMap,
        ExperimentId::QuadratureVsG,
        ExperimentId::InvertedVariance,
        ExperimentId::RatioScaling,
        ExperimentId::FrequencyScaling,
        ExperimentId::Decoherence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::QfiEvolution => "qfi-evolution",
            ExperimentId::QfiVsG => "qfi-vs-g",
            ExperimentId::QfiMap => "qfi-map",
            ExperimentId::QuadratureVsG => "quadrature-vs-g",
            ExperimentId::InvertedVariance => "inverted-variance",
            ExperimentId::RatioScaling => "ratio-scaling",
            ExperimentId::FrequencyScaling => "frequency-scaling",
            ExperimentId::Decoherence => "decoherence",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// Which engines fill a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineSelection {
    Closed,
    Oracle,
    Both,
}

impl EngineSelection {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineSelection::Closed => "closed",
            EngineSelection::Oracle => "oracle",
            EngineSelection::Both => "both",
        }
    }

    pub fn includes(self, engine: Engine) -> bool {
        matches!(
            (self, engine),
            (EngineSelection::Both, _)
                | (EngineSelection::Closed, Engine::ClosedForm)
                | (EngineSelection::Oracle, Engine::Oracle)
        )
    }

    pub fn engines(self) -> Vec<Engine> {
        [Engine::ClosedForm, Engine::Oracle]
            .into_iter()
            .filter(|e| self.includes(*e))
            .collect()
    }
}

impl FromStr for EngineSelection {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" | "closed-form" => Ok(EngineSelection::Closed),
            "oracle" => Ok(EngineSelection::Oracle),
            "both" => Ok(EngineSelection::Both),
            other => Err(value_error(
                "engine",
                format!("expected closed, oracle or both, got `{other}`"),
            )),
        }
    }
}

fn flatten(prefix: &str, table: toml::Table, out: &mut Vec<(String, String)>) -> Result<(), ConfigError> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k } else { format!("{prefix}.{k}") };
        let text = match v {
            toml::Value::Table(t) => {
                flatten(&key, t, out)?;
                continue;
            }
            toml::Value::Array(items) => items
                .into_iter()
                .map(|item| scalar_text(&key, item))
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            other => scalar_text(&key, other)?,
        };
        out.push((key, text));
    }
    Ok(())
}

fn scalar_text(key: &str, value: toml::Value) -> Result<String, ConfigError> {
    match value {
        toml::Value::String(s) => Ok(s),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(value_error(key, format!("unsupported value `{other}`"))),
    }
}

/// Parses a TOML config into `(key, value)` pairs; nested tables become
/// dotted keys and arrays comma lists.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    flatten("", text.parse::<toml::Table>()?, &mut out)?;
    Ok(out)
}

/// Parses a grid: a comma list `a,b,c`, an inclusive linear range
/// `a:b:count`, or a geometric range `log:a:b:count`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let number = |s: &str| -> Result<f64, String> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` is not finite", s.trim()))
        }
    };
    let range = |spec: &str| -> Result<(f64, f64, usize), String> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range `{spec}` must be start:stop:count"));
        }
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("count `{}` is not a positive integer", parts[2].trim()))?;
        if count == 0 {
            return Err("count must be positive".into());
        }
        Ok((number(parts[0])?, number(parts[1])?, count))
    };
    let text = text.trim();
    let values = if let Some(spec) = text.strip_prefix("log:") {
        let (a, b, count) = range(spec)?;
        if !(a > 0.0 && b > 0.0) {
            return Err("geometric range needs positive endpoints".into());
        }
        let (la, lb) = (a.ln(), b.ln());
        (0..count)
            .map(|k| match k {
                0 => a,
                k if k + 1 == count => b,
                k => (la + (lb - la) * k as f64 / (count - 1) as f64).exp(),
            })
            .collect()
    } else if text.contains(':') {
        let (a, b, count) = range(text)?;
        (0..count)
            .map(|k| match k {
                0 => a,
                k if k + 1 == count => b,
                k => a + (b - a) * k as f64 / (count - 1) as f64,
            })
            .collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    Ok(values)
}

/// Fully resolved configuration of one experiment: built-in defaults, then
/// the config file, then command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    values: BTreeMap<String, String>,
}

/// Keys excluded from the recorded configuration because they do not affect
/// the data.
const UNRECORDED_KEYS: [&str; 1] = ["out"];

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentId) -> Self {
        let values = experiments::keys(experiment)
            .iter()
            .map(|k| (k.key.to_string(), k.default.to_string()))
            .collect();
        Self { experiment, values }
    }

    pub fn from_text(experiment: ExperimentId, text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::defaults(experiment);
        for (key, value) in parse_pairs(text)? {
            config.set(&key, &value)?;
        }
        Ok(config)
    }

    pub fn from_file(experiment: ExperimentId, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(experiment, &text)
    }

    /// Sets one key. `experiment` may be given but must name this
    /// experiment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if key == "experiment" {
            if value != self.experiment.as_str() {
                return Err(value_error(
                    key,
                    format!("config is for `{value}` but `{}` was requested", self.experiment),
                ));
            }
            return Ok(());
        }
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(ConfigError::UnknownKey {
                key: key.to_string(),
                experiment: self.experiment.as_str(),
            }),
        }
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(pair.to_string()))?;
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("{} has no key `{key}`", self.experiment))
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let values = self.grid(key)?;
        match values.as_slice() {
            [v] => Ok(*v),
            _ => Err(value_error(key, "expected a single number")),
        }
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        parse_grid(self.get(key)).map_err(|reason| value_error(key, reason))
    }

    /// Grid whose entries must be non-negative integers.
    pub fn counts(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        self.grid(key)?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(value_error(key, format!("{v} is not a non-negative integer")))
                }
            })
            .collect()
    }

    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        match self.counts(key)?.as_slice() {
            [v] => Ok(*v),
            _ => Err(value_error(key, "expected a single integer")),
        }
    }

    pub fn engine(&self) -> Result<EngineSelection, ConfigError> {
        let engine: EngineSelection = self.get("engine").parse()?;
        if !experiments::engines(self.experiment).contains(&engine) {
            return Err(ConfigError::Engine {
                experiment: self.experiment.as_str(),
                engine: engine.as_str(),
            });
        }
        Ok(engine)
    }

    pub fn cutoff_policy(&self) -> Result<CutoffPolicy, ConfigError> {
        let policy = CutoffPolicy {
            start: self.count("cutoff.start")?,
            max: self.count("cutoff.max")?,
            tolerance: self.real("cutoff.tolerance")?,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Output path set in the config, if any.
    pub fn out(&self) -> Option<PathBuf> {
        let out = self.values.get("out")?;
        (!out.is_empty()).then(|| PathBuf::from(out))
    }

    /// Every key that affects the data, as JSON strings.
    pub fn to_json(&self) -> Value {
        let mut map = serde_json::Map::new();
        map.insert("experiment".into(), Value::from(self.experiment.as_str()));
        for (k, v) in &self.values {
            if !UNRECORDED_KEYS.contains(&k.as_str()) {
                map.insert(k.clone(), Value::from(v.clone()));
            }
        }
        Value::Object(map)
    }

    /// The resolved configuration as a TOML config file.
    pub fn to_text(&self) -> String {
        let quote = |v: &str| toml::Value::String(v.to_string()).to_string();
        let mut out = format!("experiment = {}\n", quote(self.experiment.as_str()));
        for spec in experiments::keys(self.experiment) {
            out.push_str(&format!("{} = {}\n", spec.key, quote(self.get(spec.key))));
        }
        out
    }
}

/// Key listing for `cqm reference`.
pub fn reference(experiment: Option<ExperimentId>) -> String {
    let ids: Vec<ExperimentId> = match experiment {
        Some(id) => vec![id],
        None => ExperimentId::ALL.to_vec(),
    };
    let mut out = String::from(
        "Grids accept `a,b,c`, `start:stop:count` (inclusive) and `log:start:stop:count`.\n\
         Engines: closed (analytic formulas), oracle (exact numerics), both.\n",
    );
    for id in ids {
        let engines: Vec<&str> = experiments::engines(id).iter().map(|e| e.as_str()).collect();
        out.push_str(&format!(
            "\n{id}: {}\n  engines: {}\n",
            experiments::summary(id),
            engines.join(", ")
        ));
        let width = experiments::keys(id).iter().map(|k| k.key.len()).max().unwrap_or(0);
        for KeySpec { key, default, doc } in experiments::keys(id) {
            out.push_str(&format!("  {key:width$}  {doc} [default: {default}]\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        let g = parse_grid("log:100:10000:3").unwrap();
        assert_eq!(g[0], 100.0);
        assert!((g[1] - 1000.0).abs() < 1e-9);
        assert_eq!(g[2], 10000.0);
        for bad in ["", "a", "1:2", "1:2:0", "log:0:1:3", "1,inf", "1:2:x"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn pairs_and_overrides() {
        let text = "# comment\n g = 0.5 # trailing\n\nt = \"0:10:3\"\nlambda = [-0.2, 0]\n[cutoff]\nmax = 256\n";
        assert_eq!(
            parse_pairs(text).unwrap(),
            vec![
                ("cutoff.max".into(), "256".into()),
                ("g".into(), "0.5".into()),
                ("lambda".into(), "-0.2,0".into()),
                ("t".into(), "0:10:3".into()),
            ]
        );
        assert_eq!(
            parse_pairs("cutoff.tolerance = 1e-7").unwrap()[0],
            ("cutoff.tolerance".into(), "0.0000001".into())
        );
        assert!(matches!(parse_pairs("novalue"), Err(ConfigError::Syntax(_))));
        assert!(matches!(parse_pairs("g = true"), Err(ConfigError::Value { .. })));
        assert!(matches!(
            ExperimentConfig::defaults(ExperimentId::QfiMap).set_pair("g"),
            Err(ConfigError::Override(_))
        ));

        let mut c = ExperimentConfig::from_text(ExperimentId::QfiEvolution, "g = 0.5\nt = [1, 2]").unwrap();
        assert_eq!(c.grid("g").unwrap(), vec![0.5]);
        c.set_pair("g=0.25").unwrap();
        assert_eq!(c.real("g").unwrap(), 0.25);
        assert!(matches!(c.set("nope", "1"), Err(ConfigError::UnknownKey { .. })));
        assert!(c.set("experiment", "qfi-map").is_err());
        c.set("experiment", "qfi-evolution").unwrap();
        assert!(c.real("t").is_err());
        c.set("engine", "both").unwrap();
        assert_eq!(c.engine().unwrap(), EngineSelection::Both);
        c.set("cutoff.start", "2").unwrap();
        assert!(matches!(c.cutoff_policy(), Err(ConfigError::Model(_))));
    }

    #[test]
    fn recorded_config_ignores_the_output_path() {
        let mut a = ExperimentConfig::defaults(ExperimentId::QfiMap);
        let b = a.clone();
        a.set("out", "/tmp/elsewhere.csv").unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.out(), Some(PathBuf::from("/tmp/elsewhere.csv")));
        assert!(matches!(
            a.set("engine", "oracle").and_then(|_| a.engine()),
            Err(ConfigError::Engine { .. })
        ));
    }

    #[test]
    fn round_trips_through_text() {
        for id in ExperimentId::ALL {
            let c = ExperimentConfig::defaults(id);
            assert_eq!(ExperimentConfig::from_text(id, &c.to_text()).unwrap(), c);
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("fig-9".parse::<ExperimentId>().is_err());
    }
}
