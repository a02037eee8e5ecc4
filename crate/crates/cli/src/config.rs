//! Experiment configuration: per-experiment defaults, overridden by a `key = value`
//! file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Scan,
    OracleCheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Scan => "scan",
            Experiment::OracleCheck => "oracle-check",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "fig1" => Experiment::Fig1,
            "fig2" => Experiment::Fig2,
            "fig3" => Experiment::Fig3,
            "fig4" => Experiment::Fig4,
            "scan" => Experiment::Scan,
            "oracle-check" => Experiment::OracleCheck,
            other => return Err(ConfigError::UnknownExperiment(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelName {
    Exact,
    TaGge,
    Gibbs,
}

impl ModelName {
    pub fn name(self) -> &'static str {
        match self {
            ModelName::Exact => "exact",
            ModelName::TaGge => "ta-gge",
            ModelName::Gibbs => "gibbs",
        }
    }
}

impl FromStr for ModelName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(ModelName::Exact),
            "ta-gge" | "gge" => Ok(ModelName::TaGge),
            "gibbs" => Ok(ModelName::Gibbs),
            other => Err(format!("unknown model `{other}` (expected exact, ta-gge or gibbs)")),
        }
    }
}

/// Initial state used by `oracle-check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleState {
    Random,
    Vacuum,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Type { key: String, value: String, reason: String },
    #[error("invalid `{key}`: {reason}")]
    Invariant { key: String, reason: String },
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    /// On-site energy of every site except the first.
    pub eps: f64,
    /// Initial on-site energy of the first site.
    pub eps1: f64,
    pub g: f64,
    pub beta0: f64,
    pub delta: f64,
    pub eps1_peak: f64,
    pub k: usize,
    /// Initial occupation of the controlled site.
    pub occupation: f64,
    pub n_list: Vec<usize>,
    pub models: Vec<ModelName>,
    pub seed: u64,
    /// Hold-time range of exact runs; `20/g` and `100/g` when unset.
    pub hold_min: Option<f64>,
    pub hold_max: Option<f64>,
    /// Number of time points in `fig1`.
    pub points: usize,
    /// Quench counts used for the `N → ∞` extrapolation columns.
    pub extrapolate: Vec<usize>,
    pub state: OracleState,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "n",
    "eps",
    "eps1",
    "g",
    "beta0",
    "delta",
    "eps1_peak",
    "K",
    "occupation",
    "quenches",
    "models",
    "seed",
    "hold_min",
    "hold_max",
    "points",
    "extrapolate",
    "state",
    "out",
];

impl ExperimentConfig {
    /// Default parameters of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        use ModelName::*;
        let local = vec![2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 24, 32];
        let base = Self {
            experiment,
            n: 100,
            eps: 1.0,
            eps1: 1.0,
            g: 0.5,
            beta0: 0.5,
            delta: 0.15,
            eps1_peak: 4.3,
            k: 0,
            occupation: 0.1,
            n_list: local.clone(),
            models: vec![Exact, TaGge, Gibbs],
            seed: 1,
            hold_min: None,
            hold_max: None,
            points: 2000,
            extrapolate: vec![128, 256, 512],
            state: OracleState::Random,
            out: None,
        };
        match experiment {
            Experiment::Fig1 => Self {
                beta0: 2.0,
                g: 0.1,
                models: vec![Exact, TaGge, Gibbs],
                ..base
            },
            Experiment::Fig2 => Self {
                g: 0.8,
                n_list: vec![2, 4, 6, 8, 10, 12, 16, 20, 30, 40, 50, 60, 70, 80, 90, 100],
                models: vec![Exact, TaGge],
                ..base
            },
            Experiment::Fig3 => Self { eps1: 0.1, ..base },
            Experiment::Fig4 => Self {
                n: 150,
                k: 32,
                eps1: 0.1,
                eps1_peak: 1.6,
                models: vec![Exact, TaGge],
                ..base
            },
            Experiment::Scan => Self {
                eps1: 0.1,
                n_list: vec![2, 3, 4, 6, 8, 12, 16],
                ..base
            },
            Experiment::OracleCheck => Self {
                n: 3,
                n_list: vec![4],
                models: vec![TaGge, Gibbs],
                ..base
            },
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "eps" => self.eps = parse(key, value)?,
            "eps1" => self.eps1 = parse(key, value)?,
            "g" => self.g = parse(key, value)?,
            "beta0" => self.beta0 = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "eps1_peak" | "eps1-peak" => self.eps1_peak = parse(key, value)?,
            "K" => self.k = parse(key, value)?,
            "occupation" => self.occupation = parse(key, value)?,
            "quenches" => self.n_list = parse_list(key, value)?,
            "models" => self.models = parse_list(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "hold_min" | "hold-min" => self.hold_min = Some(parse(key, value)?),
            "hold_max" | "hold-max" => self.hold_max = Some(parse(key, value)?),
            "points" => self.points = parse(key, value)?,
            "extrapolate" => self.extrapolate = parse_list(key, value)?,
            "state" => {
                self.state = match value {
                    "random" => OracleState::Random,
                    "vacuum" => OracleState::Vacuum,
                    _ => return Err(type_error(key, value, "expected random or vacuum")),
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every line of a config file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        for (k, v) in parse_file_text(&text, &path.display().to_string())? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: String| Err(ConfigError::Invariant { key: key.into(), reason });
        if self.n < 2 {
            return bad("n", format!("need at least 2 sites, got {}", self.n));
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("quenches", "entries must be at least 1".into());
        }
        if self.models.is_empty() {
            return bad("models", "at least one model is required".into());
        }
        let (lo, hi) = self.hold_times();
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad("hold_min", format!("need 0 ≤ hold_min ≤ hold_max, got [{lo}, {hi}]"));
        }
        if !self.g.is_finite() || !self.beta0.is_finite() || !self.eps.is_finite() || !self.eps1.is_finite() {
            return bad("g", "parameters must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.occupation) {
            return bad("occupation", format!("must lie in [0, 1], got {}", self.occupation));
        }
        let uses_bath = matches!(self.experiment, Experiment::Fig4 | Experiment::Scan);
        if uses_bath && self.k >= self.n - 1 {
            return bad("K", format!("K = {} must be below the bath size n − 1 = {}", self.k, self.n - 1));
        }
        if self.experiment == Experiment::Fig4 && self.k == 0 {
            return bad("K", "fig4 needs at least one populated bath mode".into());
        }
        if self.experiment == Experiment::Fig1 && self.points < 2 {
            return bad("points", "need at least 2 time points".into());
        }
        if self.experiment == Experiment::OracleCheck && self.n > 10 {
            return bad("n", format!("oracle check supports n ≤ 10, got {}", self.n));
        }
        if self.extrapolate.len() < 3 || self.extrapolate.windows(2).any(|w| w[1] <= w[0]) || self.extrapolate[0] < 2 {
            return bad("extrapolate", "need at least three increasing values ≥ 2".into());
        }
        Ok(())
    }

    pub fn hold_times(&self) -> (f64, f64) {
        let g = self.g.abs();
        (self.hold_min.unwrap_or(20.0 / g), self.hold_max.unwrap_or(100.0 / g))
    }

    pub fn has(&self, m: ModelName) -> bool {
        self.models.contains(&m)
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} eps={} eps1={} g={} beta0={} delta={} eps1_peak={} K={} occupation={} seed={}",
            self.experiment.name(),
            self.n,
            self.eps,
            self.eps1,
            self.g,
            self.beta0,
            self.delta,
            self.eps1_peak,
            self.k,
            self.occupation,
            self.seed
        )
    }
}

fn type_error(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Type {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| type_error(key, value, e.to_string()))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `(key, value)` pairs of a config file, in order.
pub fn parse_file_text(text: &str, path: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax {
            path: path.to_string(),
            line: i + 1,
        })?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Defaults, then the file, then the flags, then validation.
pub fn parse_config(
    experiment: Experiment,
    flags: &[(String, String)],
    file: Option<&Path>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(p) = file {
        cfg.apply_file(p)?;
    }
    for (k, v) in flags {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
