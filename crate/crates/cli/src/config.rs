//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated; `a..=b` expands to the inclusive integer range. Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `kind` | `verify`, `normal`, `gamma` or `spectral` (optional) |
//! | `model` / `models` | `cube`, `ou`, `poisson`; `models` takes a list |
//! | `spectrum` | `nat` or a bracketed list such as `[0, 1, 3/2, 2]` |
//! | `degree` / `degrees` | chaos degree(s) `k` |
//! | `dimensions` | strictly increasing schedule `N_1 < N_2 < ...` |
//! | `<model>.dimensions`, `<model>.degrees` | per-model overrides for `verify` |
//! | `family` | `paired-product`, `constant-coefficient`, `exact-gamma`, `random(<seed>)` |
//! | `samples` | Monte Carlo sample count |
//! | `seeds` | number of random chaos per configuration (`verify`) |
//! | `seed` | base seed, overridden by `CHAOSLAB_SEED` and `--seed` |
//! | `spectral_range` | largest `n` for spectral rows |
//! | `output` | CSV path; `--out` takes precedence |

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chaoslab_core::families::Family;
use chaoslab_core::markov_models::ModelTag;
use chaoslab_core::spectrum_polys::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Verify,
    Normal,
    Gamma,
    Spectral,
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "verify" => Ok(Self::Verify),
            "normal" | "normal-convergence" => Ok(Self::Normal),
            "gamma" | "gamma-convergence" => Ok(Self::Gamma),
            "spectral" | "spectral-check" => Ok(Self::Spectral),
            other => Err(format!("unknown experiment kind `{other}`")),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verify => "verify",
            Self::Normal => "normal",
            Self::Gamma => "gamma",
            Self::Spectral => "spectral",
        })
    }
}

/// A configuration problem, with the offending line when known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Per-model `(dimensions, degrees)` overrides.
pub type Override = (Option<Vec<usize>>, Option<Vec<usize>>);

#[derive(Clone, Debug, PartialEq)]
pub struct ModelPlan {
    pub model: ModelTag,
    pub dimensions: Vec<usize>,
    pub degrees: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub models: Vec<ModelTag>,
    pub spectrum: Spectrum,
    pub degrees: Vec<usize>,
    pub dimensions: Vec<usize>,
    pub overrides: BTreeMap<ModelTag, Override>,
    pub family: Family,
    pub samples: usize,
    pub seeds: usize,
    pub seed: Option<u64>,
    pub spectral_range: usize,
    pub output: Option<PathBuf>,
    lines: HashMap<String, usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            models: vec![ModelTag::Ou],
            spectrum: Spectrum::Naturals,
            degrees: vec![2],
            dimensions: Vec::new(),
            overrides: BTreeMap::new(),
            family: Family::PairedProduct,
            samples: 100_000,
            seeds: 1,
            seed: None,
            spectral_range: 200,
            output: None,
            lines: HashMap::new(),
        }
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.trim()
        .replace('_', "")
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got `{}`", v.trim()))
}

/// `1, 2, 5..=7` -> `[1, 2, 5, 6, 7]`.
pub fn parse_list(v: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..=") {
            let (lo, hi) = (parse_usize(lo)?, parse_usize(hi)?);
            if lo > hi {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(parse_usize(part)?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn parse_models(v: &str) -> Result<Vec<ModelTag>, String> {
    v.split(',')
        .map(|m| m.trim().parse::<ModelTag>().map_err(|e| e.to_string()))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if cfg.lines.insert(key.to_string(), line).is_some() {
                return Err(ConfigError::at(line, format!("duplicate key `{key}`")));
            }
            cfg.apply(key, value).map_err(|m| ConfigError::at(line, m))?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "kind" => self.kind = Some(value.parse()?),
            "model" | "models" => self.models = parse_models(value)?,
            "spectrum" => {
                self.spectrum =
                    Spectrum::parse_line(&format!("spectrum = {value}")).map_err(|e| e.to_string())?;
            }
            "degree" | "degrees" => self.degrees = parse_list(value)?,
            "dimensions" => self.dimensions = parse_list(value)?,
            "family" => self.family = value.parse().map_err(|e: chaoslab_core::ChaosError| e.to_string())?,
            "samples" => self.samples = parse_usize(value)?,
            "seeds" => self.seeds = parse_usize(value)?,
            "seed" => {
                self.seed = Some(
                    value
                        .parse()
                        .map_err(|_| format!("expected a u64 seed, got `{value}`"))?,
                );
            }
            "spectral_range" => self.spectral_range = parse_usize(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            _ => {
                let (model, field) = key
                    .split_once('.')
                    .ok_or_else(|| format!("unknown key `{key}`"))?;
                let model: ModelTag = model.parse().map_err(|_| format!("unknown key `{key}`"))?;
                let entry = self.overrides.entry(model).or_default();
                match field {
                    "dimensions" => entry.0 = Some(parse_list(value)?),
                    "degrees" | "degree" => entry.1 = Some(parse_list(value)?),
                    _ => return Err(format!("unknown key `{key}`")),
                }
            }
        }
        Ok(())
    }

    /// Line on which `key` was set.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        let alias = match key {
            "degree" => "degrees",
            "degrees" => "degree",
            "model" => "models",
            "models" => "model",
            other => other,
        };
        self.lines.get(key).or_else(|| self.lines.get(alias)).copied()
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line_of(key),
            message: message.into(),
        }
    }

    /// Dimension and degree lists for each model, with overrides applied.
    pub fn plans(&self) -> Result<Vec<ModelPlan>, ConfigError> {
        self.models
            .iter()
            .map(|&model| {
                let (dims, degs) = self.overrides.get(&model).cloned().unwrap_or_default();
                let dim_key = format!("{model}.dimensions");
                let dimensions = dims.unwrap_or_else(|| self.dimensions.clone());
                let degrees = degs.unwrap_or_else(|| self.degrees.clone());
                if dimensions.is_empty() {
                    return Err(self.error("dimensions", format!("no dimensions given for {model}")));
                }
                let key = if self.line_of(&dim_key).is_some() { dim_key.as_str() } else { "dimensions" };
                self.check_schedule(key, &dimensions)?;
                Ok(ModelPlan {
                    model,
                    dimensions,
                    degrees,
                })
            })
            .collect()
    }

    fn check_schedule(&self, key: &str, dims: &[usize]) -> Result<(), ConfigError> {
        if dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(self.error(key, "dimension schedule must be strictly increasing"));
        }
        if dims.first() == Some(&0) {
            return Err(self.error(key, "dimensions must be positive"));
        }
        Ok(())
    }

    /// The single model, degree and schedule of a convergence experiment.
    pub fn convergence_plan(&self) -> Result<(ModelTag, usize, Vec<usize>), ConfigError> {
        let [model] = self.models[..] else {
            return Err(self.error("models", "convergence experiments take exactly one model"));
        };
        let [k] = self.degrees[..] else {
            return Err(self.error("degree", "convergence experiments take exactly one degree"));
        };
        if self.dimensions.is_empty() {
            return Err(ConfigError::general("missing `dimensions`"));
        }
        self.check_schedule("dimensions", &self.dimensions)?;
        if k == 0 {
            return Err(self.error("degree", "degree must be positive"));
        }
        // Multilinear families need k distinct coordinates.
        let multilinear = matches!(self.family, Family::PairedProduct | Family::Random { .. });
        if multilinear && k > self.dimensions[0] {
            return Err(self.error("dimensions", format!("degree {k} exceeds the smallest dimension")));
        }
        if self.samples == 0 {
            return Err(self.error("samples", "sample count must be positive"));
        }
        Ok((model, k, self.dimensions.clone()))
    }
}
