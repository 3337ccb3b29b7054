//! Run configuration: which suite to execute and with what parameters.
//!
//! A [`RunConfig`] can be assembled from command-line flags, from a
//! line-oriented `key=value` file, or from both; wherever both supply a
//! value the flag wins. [`PartialConfig`] is the mergeable intermediate:
//! every field optional, `merge` layering one partial over another, and
//! `finalize` filling documented defaults and validating cross-field
//! requirements (for example `pair` needing a multi-index).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors raised while reading, merging, or validating a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// A config-file line is neither `key=value`, blank, nor a `#` comment.
    #[error("malformed line {line} in config file: {text:?} (expected key=value)")]
    MalformedLine { line: usize, text: String },
    /// The config file or flags used a key the tool does not recognize.
    #[error("unknown configuration key {key:?}")]
    UnknownKey { key: String },
    /// A value failed to parse as the type its key requires.
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    /// No command was given on the command line or in the config file.
    #[error("no command given; expected one of {}", Command::NAMES.join(", "))]
    MissingCommand,
    /// The chosen command needs a field that was never supplied.
    #[error("command {command} requires {field}")]
    MissingField { command: &'static str, field: &'static str },
    /// Reading the config file failed.
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
}

/// The check suite (or computation) a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Orthonormality and bracket invariants of the u(n) basis.
    Basis,
    /// Group-side root scaling law on random diagonal directions.
    Roots,
    /// Solve relation-variety points and test the connection axioms.
    ConnectionCheck,
    /// Pullback identity between orbit two-forms and torus components.
    KksCheck,
    /// One intersection pairing, with exact base value and checks.
    Pair,
    /// Rank-two orbit-volume anchor against direct quadrature.
    OrbitAnchor,
    /// Every suite above in one report.
    VerifyAll,
}

impl Command {
    pub const NAMES: [&'static str; 7] = [
        "basis",
        "roots",
        "connection-check",
        "kks-check",
        "pair",
        "orbit-anchor",
        "verify-all",
    ];

    pub fn parse_name(text: &str) -> Option<Self> {
        match text {
            "basis" => Some(Self::Basis),
            "roots" => Some(Self::Roots),
            "connection-check" => Some(Self::ConnectionCheck),
            "kks-check" => Some(Self::KksCheck),
            "pair" => Some(Self::Pair),
            "orbit-anchor" => Some(Self::OrbitAnchor),
            "verify-all" => Some(Self::VerifyAll),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Basis => "basis",
            Self::Roots => "roots",
            Self::ConnectionCheck => "connection-check",
            Self::KksCheck => "kks-check",
            Self::Pair => "pair",
            Self::OrbitAnchor => "orbit-anchor",
            Self::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse_name(text: &str) -> Option<Self> {
        match text {
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
        }
    }
}

/// How the multiplicative normalization constant is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum C1Mode {
    /// User-supplied constant 1.
    Unit,
    /// Derived from a measured orbit volume for the given weight vector.
    Volume { volume: f64, weights: Vec<f64> },
}

impl C1Mode {
    /// Parses `unit` or `volume:<float>:<w_1,...,w_n>`.
    pub fn parse_spec(key: &str, text: &str) -> Result<Self, ConfigError> {
        if text == "unit" {
            return Ok(Self::Unit);
        }
        let invalid = |reason: &str| ConfigError::InvalidValue {
            key: key.to_string(),
            value: text.to_string(),
            reason: reason.to_string(),
        };
        let rest = text
            .strip_prefix("volume:")
            .ok_or_else(|| invalid("expected `unit` or `volume:<float>:<weights>`"))?;
        let (volume_text, weights_text) = rest
            .split_once(':')
            .ok_or_else(|| invalid("expected `volume:<float>:<weights>`"))?;
        let volume = parse_finite_f64(key, volume_text)?;
        let weights = weights_text
            .split(',')
            .map(|w| parse_finite_f64(key, w.trim()))
            .collect::<Result<Vec<f64>, _>>()?;
        if weights.is_empty() {
            return Err(invalid("weight list is empty"));
        }
        Ok(Self::Volume { volume, weights })
    }
}

/// A fully validated run description; every suite reads only from this.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Unitary rank n.
    pub n: usize,
    /// Surface genus for relation-variety commands.
    pub g: usize,
    /// Exponent multi-index for `pair`.
    pub alpha: Option<Vec<u32>>,
    /// Seed for every randomized draw in the run.
    pub seed: u64,
    pub c1: C1Mode,
    /// Per-check tolerance overrides, keyed by check name.
    pub tol_overrides: BTreeMap<String, f64>,
    /// Initial solver line-search step.
    pub step: f64,
    /// Solver iteration budget.
    pub budget: usize,
    /// Report destination; stdout when absent.
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// A configuration fragment: all fields optional so that sources merge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub g: Option<usize>,
    pub alpha: Option<Vec<u32>>,
    pub seed: Option<u64>,
    pub c1: Option<C1Mode>,
    pub tol_overrides: BTreeMap<String, f64>,
    pub step: Option<f64>,
    pub budget: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl PartialConfig {
    /// Layers `self` over `base`: fields present here win, tolerance
    /// overrides merge per key with `self` taking precedence.
    pub fn over(self, base: PartialConfig) -> PartialConfig {
        let mut tol_overrides = base.tol_overrides;
        tol_overrides.extend(self.tol_overrides);
        PartialConfig {
            command: self.command.or(base.command),
            n: self.n.or(base.n),
            g: self.g.or(base.g),
            alpha: self.alpha.or(base.alpha),
            seed: self.seed.or(base.seed),
            c1: self.c1.or(base.c1),
            tol_overrides,
            step: self.step.or(base.step),
            budget: self.budget.or(base.budget),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    /// Fills defaults, validates invariants, and checks per-command
    /// requirements.
    pub fn finalize(self) -> Result<RunConfig, ConfigError> {
        let command = self.command.ok_or(ConfigError::MissingCommand)?;
        let config = RunConfig {
            command,
            n: self.n.unwrap_or(2),
            g: self.g.unwrap_or(1),
            alpha: self.alpha,
            seed: self.seed.unwrap_or(7),
            c1: self.c1.unwrap_or(C1Mode::Unit),
            tol_overrides: self.tol_overrides,
            step: self.step.unwrap_or(0.25),
            budget: self.budget.unwrap_or(10_000),
            out: self.out,
            format: self.format.unwrap_or(Format::Json),
        };
        if config.n == 0 {
            return Err(invalid_static("n", "0", "rank must be at least 1"));
        }
        if config.g == 0 {
            return Err(invalid_static("g", "0", "genus must be at least 1"));
        }
        if !(config.step.is_finite() && config.step > 0.0) {
            return Err(invalid_static("step", "non-positive", "step must be positive"));
        }
        if config.budget == 0 {
            return Err(invalid_static("budget", "0", "budget must be at least 1"));
        }
        if config.command == Command::Pair && config.alpha.is_none() {
            return Err(ConfigError::MissingField { command: "pair", field: "--alpha" });
        }
        Ok(config)
    }

    /// Applies one `key=value` assignment (config-file line or flag body).
    pub fn assign(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "command" => {
                self.command = Some(Command::parse_name(value).ok_or_else(|| {
                    ConfigError::InvalidValue {
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: format!("expected one of {}", Command::NAMES.join(", ")),
                    }
                })?);
            }
            "n" => self.n = Some(parse_int(key, value)?),
            "g" => self.g = Some(parse_int(key, value)?),
            "alpha" => self.alpha = Some(parse_alpha(key, value)?),
            "seed" => self.seed = Some(parse_int(key, value)?),
            "c1-mode" => self.c1 = Some(C1Mode::parse_spec(key, value)?),
            "step" => self.step = Some(parse_finite_f64(key, value)?),
            "budget" => self.budget = Some(parse_int(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => {
                self.format = Some(Format::parse_name(value).ok_or_else(|| {
                    ConfigError::InvalidValue {
                        key: key.to_string(),
                        value: value.to_string(),
                        reason: "expected json or csv".to_string(),
                    }
                })?);
            }
            _ => {
                if let Some(name) = key.strip_prefix("tol.") {
                    if name.is_empty() {
                        return Err(ConfigError::UnknownKey { key: key.to_string() });
                    }
                    let tol = parse_finite_f64(key, value)?;
                    self.tol_overrides.insert(name.to_string(), tol);
                } else {
                    return Err(ConfigError::UnknownKey { key: key.to_string() });
                }
            }
        }
        Ok(())
    }
}

fn invalid_static(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse::<T>().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a non-negative integer in range".to_string(),
    })
}

fn parse_finite_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let parsed = value.trim().parse::<f64>().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a floating-point number".to_string(),
    })?;
    if !parsed.is_finite() {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "must be finite".to_string(),
        });
    }
    Ok(parsed)
}

/// Parses a comma-separated exponent list such as `2,1,0`.
pub fn parse_alpha(key: &str, value: &str) -> Result<Vec<u32>, ConfigError> {
    let entries = value
        .split(',')
        .map(|piece| parse_int::<u32>(key, piece))
        .collect::<Result<Vec<u32>, _>>()?;
    if entries.is_empty() {
        return Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "exponent list is empty".to_string(),
        });
    }
    Ok(entries)
}

/// Parses a line-oriented `key=value` file; `#` lines and blanks are
/// skipped.
pub fn parse_config_file(path: &Path) -> Result<PartialConfig, ConfigError> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

/// Parses config-file content; see [`parse_config_file`].
pub fn parse_config_text(text: &str) -> Result<PartialConfig, ConfigError> {
    let mut partial = PartialConfig::default();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::MalformedLine {
            line: index + 1,
            text: raw.to_string(),
        })?;
        partial.assign(key.trim(), value.trim())?;
    }
    Ok(partial)
}
