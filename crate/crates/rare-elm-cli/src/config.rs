use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

/// Invalid or inconsistent experiment settings.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

fn invalid(key: &str, value: impl fmt::Display, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

/// Estimators the driver can run. The declaration order is the row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Cmc,
    Ak,
    Mcis,
    ElmA,
    ElmA3,
    ElmB,
    LowerBound,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Cmc,
        Method::Ak,
        Method::Mcis,
        Method::ElmA,
        Method::ElmA3,
        Method::ElmB,
        Method::LowerBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Cmc => "cmc",
            Method::Ak => "ak",
            Method::Mcis => "mcis",
            Method::ElmA => "elm-a",
            Method::ElmA3 => "elm-a3",
            Method::ElmB => "elm-b",
            Method::LowerBound => "lower-bound",
        }
    }

    /// Samples per replicate for `n_t` per density. Benchmarks get the pooled
    /// size of the four-density scheme; the lower bound draws none.
    pub fn budget(self, n_per_density: usize) -> usize {
        match self {
            Method::Cmc | Method::Ak | Method::Mcis | Method::ElmA => 4 * n_per_density,
            Method::ElmA3 => 3 * n_per_density,
            Method::ElmB => 2 * n_per_density,
            Method::LowerBound => 0,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            invalid(
                "method",
                s,
                "expected one of cmc, ak, mcis, elm-a, elm-a3, elm-b, lower-bound",
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(invalid("format", s, "expected csv or table")),
        }
    }
}

/// One cell: a method on one problem, replicated `reps` times.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub alpha: f64,
    pub gamma: f64,
    pub d: usize,
    pub n_per_density: usize,
    pub reps: usize,
    pub seed: u64,
    pub subsample: f64,
    pub burn_in: usize,
    pub thin: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method, alpha: f64, gamma: f64, d: usize) -> Self {
        Self {
            method,
            alpha,
            gamma,
            d,
            n_per_density: 10_000,
            reps: 30,
            seed: 1,
            subsample: 0.5,
            burn_in: 0,
            thin: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", self.alpha, "must be finite and > 0"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", self.gamma, "must be finite and > 0"));
        }
        if self.d == 0 {
            return Err(invalid("d", self.d, "must be >= 1"));
        }
        if self.n_per_density == 0 {
            return Err(invalid("n-per-density", self.n_per_density, "must be >= 1"));
        }
        if self.reps == 0 {
            return Err(invalid("reps", self.reps, "must be >= 1"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(invalid("subsample", self.subsample, "must lie in (0, 1]"));
        }
        if self.thin == 0 {
            return Err(invalid("thin", self.thin, "must be >= 1"));
        }
        match self.method {
            Method::ElmA if self.d < 2 => Err(invalid("d", self.d, "elm-a needs d >= 2; use elm-a3 for d = 1")),
            Method::ElmB | Method::LowerBound if self.alpha > 1.0 => Err(invalid(
                "alpha",
                self.alpha,
                format!("{} needs alpha <= 1", self.method),
            )),
            Method::Mcis | Method::ElmA | Method::ElmA3 if (self.subsample * self.n_per_density as f64) < 1.0 => {
                Err(invalid(
                    "subsample",
                    self.subsample,
                    "leaves no chain rows for the marginal table",
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Settings keys, as accepted on the command line and in config files.
pub const KEYS: [&str; 12] = [
    "method",
    "alpha",
    "gamma",
    "d",
    "n-per-density",
    "reps",
    "seed",
    "subsample",
    "burn-in",
    "thin",
    "out",
    "format",
];

/// Unparsed settings; later insertions override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = key.replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut out = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
            })?;
            out.set(k.trim(), v.trim())?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// `other` wins on shared keys.
    pub fn merged(mut self, other: &RawConfig) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }
}

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T, ConfigError> {
    s.trim().parse().map_err(|_| invalid(key, s, "cannot parse"))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>, ConfigError> {
    let out: Vec<T> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| parse_one(key, p))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(invalid(key, s, "empty list"));
    }
    Ok(out)
}

/// Fully parsed settings: comma lists for the grid axes, scalars elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub methods: Vec<Method>,
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub ds: Vec<usize>,
    pub template: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Settings {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let req = |key: &'static str| raw.get(key).ok_or(ConfigError::Missing(key));
        let methods: Vec<Method> = req("method")?
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()?;
        if methods.is_empty() {
            return Err(invalid("method", "", "empty list"));
        }
        let alphas: Vec<f64> = parse_list("alpha", req("alpha")?)?;
        let gammas: Vec<f64> = parse_list("gamma", req("gamma")?)?;
        let ds: Vec<usize> = parse_list("d", raw.get("d").unwrap_or("10"))?;
        let mut t = ExperimentConfig::new(methods[0], alphas[0], gammas[0], ds[0]);
        if let Some(v) = raw.get("n-per-density") {
            t.n_per_density = parse_one("n-per-density", v)?;
        }
        if let Some(v) = raw.get("reps") {
            t.reps = parse_one("reps", v)?;
        }
        if let Some(v) = raw.get("seed") {
            t.seed = parse_one("seed", v)?;
        }
        if let Some(v) = raw.get("subsample") {
            t.subsample = parse_one("subsample", v)?;
        }
        if let Some(v) = raw.get("burn-in") {
            t.burn_in = parse_one("burn-in", v)?;
        }
        if let Some(v) = raw.get("thin") {
            t.thin = parse_one("thin", v)?;
        }
        let format = raw.get("format").map(str::parse).transpose()?.unwrap_or_default();
        let settings = Settings {
            methods,
            alphas,
            gammas,
            ds,
            template: t,
            out: raw.get("out").map(PathBuf::from),
            format,
        };
        for cell in settings.cells() {
            cell.validate()?;
        }
        Ok(settings)
    }

    /// Every (method, γ, α, d) combination.
    pub fn cells(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &gamma in &self.gammas {
                for &alpha in &self.alphas {
                    for &d in &self.ds {
                        out.push(ExperimentConfig {
                            method,
                            alpha,
                            gamma,
                            d,
                            ..self.template.clone()
                        });
                    }
                }
            }
        }
        out
    }

    /// A single problem, possibly with several methods side by side.
    pub fn require_single_problem(&self) -> Result<(), ConfigError> {
        for (key, n) in [
            ("alpha", self.alphas.len()),
            ("gamma", self.gammas.len()),
            ("d", self.ds.len()),
        ] {
            if n != 1 {
                return Err(invalid(
                    key,
                    format!("{n} values"),
                    "estimate takes one value; use sweep for grids",
                ));
            }
        }
        Ok(())
    }
}
