//! Experiment configuration, shared by the subcommands and `run --config`.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use quasispec::circlemap::DEFAULT_PRECISION_FACTOR;
use quasispec::sturmian::{convergents, parse_coefficients, periodic, ContinuedFraction};
use quasispec::symbolic::Substitution;
use quasispec::{Error, Result};

pub const DEFAULT_DEPTH: usize = 60;

/// Models reachable by name with `--model`.
pub const MODEL_NAMES: [&str; 5] = Substitution::NAMES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Worker threads; `None` uses all cores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Record wall time in the report. Off by default so reports are
    /// byte-identical across runs.
    #[serde(default)]
    pub timings: bool,
}

/// Either a named substitution model, a custom substitution, or a rotation
/// number given by its continued fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Mapping such as `a:ab,b:a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub substitution: Option<String>,
    /// Coefficients `a_1, a_2, ...` with `x` repeats, e.g. `1,1,1x40`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_cf: Option<String>,
    /// Period of an eventually periodic CF, unrolled to `depth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_period: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_preperiod: Option<String>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// `p/q` or a decimal; defaults to `beta = alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_precision")]
    pub precision: u64,
}

fn default_depth() -> usize {
    DEFAULT_DEPTH
}

fn default_lambda() -> f64 {
    1.0
}

fn default_precision() -> u64 {
    DEFAULT_PRECISION_FACTOR
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            name: None,
            substitution: None,
            alpha_cf: None,
            alpha_period: None,
            alpha_preperiod: None,
            depth: DEFAULT_DEPTH,
            beta: None,
            lambda: 1.0,
            precision: DEFAULT_PRECISION_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    Word {
        length: usize,
        /// Also export `s_{-1}, ..., s_tower`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tower: Option<usize>,
    },
    Spectrum {
        /// `a..b`, `a,b,c` or a single level.
        levels: String,
    },
    Lyapunov {
        /// `sturmian`, `free` or `approximant:N`.
        #[serde(default = "default_potential")]
        potential: String,
        /// `a:b:n`, `from-spectrum:L` or a comma list.
        energies: String,
        steps: u64,
        /// Phase `p/q` of the Sturmian potential.
        #[serde(default = "default_theta")]
        theta: String,
    },
    Gordon {
        levels: String,
        energies: String,
        seeds: usize,
        #[serde(default)]
        rng_seed: u64,
        /// Traces of `s_k`, `k <= trace_level_max`, set `C`.
        #[serde(default = "default_trace_level")]
        trace_level_max: usize,
    },
    HullCheck {
        #[serde(rename = "L")]
        length: usize,
        grid: u64,
        prefix: usize,
    },
    Appendix {
        #[serde(default = "default_range")]
        range: i64,
        #[serde(default = "default_thetas")]
        thetas: usize,
        #[serde(default)]
        rng_seed: u64,
    },
}

fn default_potential() -> String {
    "sturmian".into()
}

fn default_theta() -> String {
    "0".into()
}

fn default_trace_level() -> usize {
    8
}

fn default_range() -> i64 {
    1000
}

fn default_thetas() -> usize {
    20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// Where energies come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergySpec {
    Grid { from: f64, to: f64, count: usize },
    FromSpectrum(usize),
    List(Vec<f64>),
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        module: "cli",
        name,
        reason: reason.into(),
    }
}

fn bounded<T: PartialOrd + std::fmt::Display + Copy>(
    name: &'static str,
    value: T,
    range: RangeInclusive<T>,
) -> Result<T> {
    if range.contains(&value) {
        Ok(value)
    } else {
        Err(invalid(
            name,
            format!("{value} is outside [{}, {}]", range.start(), range.end()),
        ))
    }
}

/// Documented knob bounds.
pub mod limits {
    pub const LEVEL: usize = 40;
    pub const WORD_LENGTH: usize = 100_000_000;
    pub const STEPS: std::ops::RangeInclusive<u64> = 1_000..=10_000_000;
    pub const ENERGIES: usize = 100_000;
    pub const SEEDS: usize = 100_000;
    pub const GRID: u64 = 10_000_000;
    pub const PREFIX: usize = 10_000_000;
    pub const FACTOR_LENGTH: usize = 64;
    pub const RANGE: i64 = 1_000_000;
    pub const THETAS: usize = 10_000;
    pub const DEPTH: usize = 10_000;
    pub const PRECISION: std::ops::RangeInclusive<u64> = 2..=1_000_000;
}

pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let bad = || {
        invalid(
            "levels",
            format!("cannot parse {text:?}; use a..b, a,b,c or n"),
        )
    };
    let levels: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if levels.is_empty() {
        return Err(bad());
    }
    for &l in &levels {
        bounded("levels", l, 0..=limits::LEVEL)?;
    }
    Ok(levels)
}

pub fn parse_energies(text: &str) -> Result<EnergySpec> {
    let bad = || {
        invalid(
            "energies",
            format!("cannot parse {text:?}; use a:b:n, from-spectrum:L or a list"),
        )
    };
    if let Some(level) = text.strip_prefix("from-spectrum:") {
        let level = level.trim().parse().map_err(|_| bad())?;
        return Ok(EnergySpec::FromSpectrum(bounded(
            "energies",
            level,
            0..=limits::LEVEL,
        )?));
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let from: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let to: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(from.is_finite() && to.is_finite()) || count == 0 || (count > 1 && to < from) {
            return Err(bad());
        }
        bounded("energies", count, 1..=limits::ENERGIES)?;
        return Ok(EnergySpec::Grid { from, to, count });
    }
    let list: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(bad)
        })
        .collect::<Result<_>>()?;
    bounded("energies", list.len(), 1..=limits::ENERGIES)?;
    Ok(EnergySpec::List(list))
}

impl EnergySpec {
    /// Explicit energies; `FromSpectrum` is resolved by the runner.
    pub fn grid_points(&self) -> Option<Vec<f64>> {
        match self {
            EnergySpec::Grid { from, to, count } => Some(
                (0..*count)
                    .map(|i| {
                        if *count == 1 {
                            *from
                        } else {
                            from + (to - from) * i as f64 / (*count - 1) as f64
                        }
                    })
                    .collect(),
            ),
            EnergySpec::List(v) => Some(v.clone()),
            EnergySpec::FromSpectrum(_) => None,
        }
    }
}

/// `p/q`, an integer, or a finite decimal.
pub fn parse_rational(name: &'static str, text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || invalid(name, format!("cannot parse {text:?} as p/q or a decimal"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            return Err(invalid(name, "zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.contains(['-', '+']) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = BigInt::from(10).pow(frac.len() as u32);
    Ok(BigRational::new(digits, scale))
}

pub enum ModelKind {
    Rotation(ContinuedFraction),
    Substitution { name: String, rule: Substitution },
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        bounded("depth", self.depth, 1..=limits::DEPTH)?;
        bounded("precision", self.precision, limits::PRECISION)?;
        if !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        let sources = [
            self.name.is_some(),
            self.substitution.is_some(),
            self.alpha_cf.is_some(),
            self.alpha_period.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(invalid(
                "model",
                "give at most one of name, substitution, alpha-cf, alpha-period",
            ));
        }
        if self.alpha_preperiod.is_some() && self.alpha_period.is_none() {
            return Err(invalid("alpha-preperiod", "needs alpha-period"));
        }
        if let Some(beta) = self.beta()? {
            if beta <= BigRational::zero() || beta >= BigRational::one() {
                return Err(invalid("beta", format!("{beta} is outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Resolves the model. `fibonacci` (also the default) is the golden-mean
    /// rotation, whose coding is the Fibonacci Sturmian word.
    pub fn resolve(&self) -> Result<ModelKind> {
        self.validate()?;
        if let Some(cf) = &self.alpha_cf {
            return Ok(ModelKind::Rotation(convergents(&parse_coefficients(cf)?)?));
        }
        if let Some(period) = &self.alpha_period {
            let period = parse_coefficients(period)?;
            let pre = match &self.alpha_preperiod {
                Some(p) => parse_coefficients(p)?,
                None => Vec::new(),
            };
            return Ok(ModelKind::Rotation(periodic(&pre, &period, self.depth)?));
        }
        if let Some(rule) = &self.substitution {
            return Ok(ModelKind::Substitution {
                name: rule.clone(),
                rule: Substitution::parse(rule)?,
            });
        }
        match self.name.as_deref().unwrap_or("fibonacci") {
            "fibonacci" => Ok(ModelKind::Rotation(periodic(&[], &[1], self.depth)?)),
            other => Substitution::named(other)
                .map(|rule| ModelKind::Substitution {
                    name: other.into(),
                    rule,
                })
                .ok_or_else(|| {
                    invalid(
                        "model",
                        format!("unknown model {other:?}; known: {}", MODEL_NAMES.join(", ")),
                    )
                }),
        }
    }

    pub fn rotation(&self) -> Result<ContinuedFraction> {
        match self.resolve()? {
            ModelKind::Rotation(cf) => Ok(cf),
            ModelKind::Substitution { name, .. } => Err(invalid(
                "model",
                format!("this task needs a rotation number; {name:?} is a substitution"),
            )),
        }
    }

    pub fn beta(&self) -> Result<Option<BigRational>> {
        self.beta
            .as_deref()
            .map(|b| parse_rational("beta", b))
            .transpose()
    }
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Word { .. } => "word",
            TaskConfig::Spectrum { .. } => "spectrum",
            TaskConfig::Lyapunov { .. } => "lyapunov",
            TaskConfig::Gordon { .. } => "gordon",
            TaskConfig::HullCheck { .. } => "hull-check",
            TaskConfig::Appendix { .. } => "appendix",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TaskConfig::Word { length, tower } => {
                bounded("length", *length, 1..=limits::WORD_LENGTH)?;
                if let Some(t) = tower {
                    bounded("tower", *t, 0..=limits::LEVEL)?;
                }
            }
            TaskConfig::Spectrum { levels } => {
                parse_levels(levels)?;
            }
            TaskConfig::Lyapunov {
                potential,
                energies,
                steps,
                theta,
            } => {
                bounded("steps", *steps, limits::STEPS)?;
                parse_energies(energies)?;
                parse_potential(potential)?;
                parse_rational("theta", theta)?;
            }
            TaskConfig::Gordon {
                levels,
                energies,
                seeds,
                trace_level_max,
                ..
            } => {
                parse_levels(levels)?;
                parse_energies(energies)?;
                bounded("seeds", *seeds, 1..=limits::SEEDS)?;
                bounded("trace_level_max", *trace_level_max, 0..=limits::LEVEL)?;
            }
            TaskConfig::HullCheck {
                length,
                grid,
                prefix,
            } => {
                bounded("L", *length, 1..=limits::FACTOR_LENGTH)?;
                bounded("grid", *grid, 1..=limits::GRID)?;
                bounded("prefix", *prefix, *length..=limits::PREFIX)?;
            }
            TaskConfig::Appendix { range, thetas, .. } => {
                bounded("range", *range, 1..=limits::RANGE)?;
                bounded("thetas", *thetas, 0..=limits::THETAS)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Sturmian,
    Free,
    Approximant(usize),
}

pub fn parse_potential(text: &str) -> Result<PotentialKind> {
    match text {
        "sturmian" => Ok(PotentialKind::Sturmian),
        "free" => Ok(PotentialKind::Free),
        other => other
            .strip_prefix("approximant:")
            .and_then(|l| l.parse().ok())
            .filter(|&l| l <= limits::LEVEL)
            .map(PotentialKind::Approximant)
            .ok_or_else(|| {
                invalid(
                    "potential",
                    format!("unknown potential {other:?}; use sturmian, free or approximant:N"),
                )
            }),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.task.validate()?;
        if let Some(j) = self.jobs {
            bounded("jobs", j, 1..=1024)?;
        }
        Ok(())
    }

    /// Reads JSON or TOML, chosen by the file extension.
    pub fn from_text(text: &str, toml_syntax: bool) -> Result<Self> {
        let config: ExperimentConfig = if toml_syntax {
            toml::from_str(text).map_err(|e| invalid("config", e.to_string()))?
        } else {
            serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }
}
