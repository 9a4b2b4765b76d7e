//! Run configuration: TOML in, validated [`RunConfig`] out.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_N_K: usize = 400;
pub const DEFAULT_N_QUAD: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed document; the message carries line and column.
    Parse(String),
    /// Well-formed but missing or out-of-range fields.
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "parse error: {m}"),
            ConfigError::Validation(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Zak,
    Evolve,
    Scatter,
    NetworkCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Zak => "zak",
            Command::Evolve => "evolve",
            Command::Scatter => "scatter",
            Command::NetworkCheck => "network-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierKind {
    Literal,
    UpperBand,
    Dressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Constant,
    Linear,
    Erf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingKind {
    BeforeArrival,
    DuringTransit,
}

/// Document as written; every field optional so validation can name what is missing.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    delta: Option<f64>,
    #[serde(rename = "Delta")]
    gain: Option<f64>,
    flux: Option<f64>,
    dt: Option<f64>,
    n_k: Option<usize>,
    n_quad: Option<usize>,
    n_cells: Option<usize>,
    n_a: Option<usize>,
    n_b: Option<usize>,
    n_d: Option<usize>,
    center: Option<f64>,
    width: Option<f64>,
    k0: Option<f64>,
    carrier: Option<CarrierKind>,
    protocol: Option<ProtocolKind>,
    beta: Option<f64>,
    duration: Option<f64>,
    final_flux: Option<f64>,
    timing: Option<TimingKind>,
    ring_threshold: Option<f64>,
    total_time: Option<f64>,
    stride: Option<usize>,
    check_halving: Option<bool>,
    max_imag_bound: Option<f64>,
}

/// Validated configuration with defaults applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub gain: f64,
    pub flux: f64,
    pub dt: f64,
    pub n_k: usize,
    pub n_quad: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub width: f64,
    pub k0: f64,
    pub carrier: CarrierKind,
    pub protocol: ProtocolKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    pub final_flux: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingKind>,
    pub ring_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    pub stride: usize,
    pub check_halving: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_imag_bound: Option<f64>,
}

fn missing(field: &str, cmd: Option<Command>) -> ConfigError {
    match cmd {
        Some(c) => ConfigError::Validation(format!("missing field `{field}` (required by `{}`)", c.name())),
        None => ConfigError::Validation(format!("missing field `{field}`")),
    }
}

fn require<T>(v: Option<T>, field: &str, cmd: Command) -> Result<T, ConfigError> {
    v.ok_or_else(|| missing(field, Some(cmd)))
}

/// Parses a TOML document into a table, for callers that want to patch keys first.
pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>().map_err(|e| ConfigError::Parse(e.to_string()))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    from_table(parse_table(text)?)
}

pub fn from_table(table: toml::Table) -> Result<RunConfig, ConfigError> {
    let raw = RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| ConfigError::Parse(e.to_string()))?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let command = raw.command.ok_or_else(|| missing("command", None))?;
    let delta = raw.delta.ok_or_else(|| missing("delta", Some(command)))?;
    let gain = raw.gain.ok_or_else(|| missing("Delta", Some(command)))?;
    let cfg = RunConfig {
        command,
        delta,
        gain,
        flux: raw.flux.unwrap_or(0.0),
        dt: raw.dt.unwrap_or(DEFAULT_DT),
        n_k: raw.n_k.unwrap_or(DEFAULT_N_K),
        n_quad: raw.n_quad.unwrap_or(DEFAULT_N_QUAD),
        n_cells: raw.n_cells,
        n_a: raw.n_a,
        n_b: raw.n_b,
        n_d: raw.n_d,
        center: raw.center,
        width: raw.width.unwrap_or(0.05),
        k0: raw.k0.unwrap_or(PI / 4.0),
        carrier: raw.carrier.unwrap_or(CarrierKind::UpperBand),
        protocol: raw.protocol.unwrap_or(ProtocolKind::Linear),
        beta: raw.beta,
        duration: raw.duration,
        final_flux: raw.final_flux.unwrap_or(PI),
        timing: raw.timing,
        ring_threshold: raw.ring_threshold.unwrap_or(0.99),
        total_time: raw.total_time,
        stride: raw.stride.unwrap_or(50),
        check_halving: raw.check_halving.unwrap_or(true),
        max_imag_bound: raw.max_imag_bound,
    };
    cfg.check()?;
    Ok(cfg)
}

impl RunConfig {
    /// Normalized TOML; parsing it back gives the same config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Re-validates after a field was changed in place (e.g. by a flag).
    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        let reals = [
            ("delta", Some(self.delta)),
            ("Delta", Some(self.gain)),
            ("flux", Some(self.flux)),
            ("dt", Some(self.dt)),
            ("center", self.center),
            ("width", Some(self.width)),
            ("k0", Some(self.k0)),
            ("beta", self.beta),
            ("duration", self.duration),
            ("final_flux", Some(self.final_flux)),
            ("ring_threshold", Some(self.ring_threshold)),
            ("total_time", self.total_time),
            ("max_imag_bound", self.max_imag_bound),
        ];
        for (name, v) in reals {
            if let Some(x) = v {
                if !x.is_finite() {
                    return bad(format!("`{name}` must be finite, got {x}"));
                }
            }
        }
        if self.delta.abs() >= 1.0 {
            return bad(format!("`delta` must satisfy |delta| < 1, got {}", self.delta));
        }
        if !(self.dt > 0.0) {
            return bad(format!("`dt` must be positive, got {}", self.dt));
        }
        if self.n_k < 16 {
            return bad(format!("`n_k` must be at least 16, got {}", self.n_k));
        }
        if self.n_quad < 2 {
            return bad(format!("`n_quad` must be at least 2, got {}", self.n_quad));
        }
        if !(self.width > 0.0) {
            return bad(format!("`width` must be positive, got {}", self.width));
        }
        if self.stride == 0 {
            return bad("`stride` must be at least 1".into());
        }
        if !(self.ring_threshold > 0.0 && self.ring_threshold < 1.0) {
            return bad(format!("`ring_threshold` must lie in (0, 1), got {}", self.ring_threshold));
        }
        let cmd = self.command;
        match cmd {
            Command::Spectrum | Command::Zak => {}
            Command::Evolve => {
                require(self.n_cells, "n_cells", cmd)?;
                self.protocol_rate(cmd)?;
            }
            Command::Scatter => {
                require(self.n_a, "n_a", cmd)?;
                require(self.n_b, "n_b", cmd)?;
                require(self.n_d, "n_d", cmd)?;
                require(self.timing, "timing", cmd)?;
                self.protocol_rate(cmd)?;
            }
            Command::NetworkCheck => {
                require(self.n_a, "n_a", cmd)?;
                require(self.n_b, "n_b", cmd)?;
                require(self.n_d, "n_d", cmd)?;
            }
        }
        for (name, v) in [("n_cells", self.n_cells), ("n_a", self.n_a), ("n_b", self.n_b), ("n_d", self.n_d)] {
            if v == Some(0) {
                return bad(format!("`{name}` must be at least 1"));
            }
        }
        Ok(())
    }

    fn protocol_rate(&self, cmd: Command) -> Result<(), ConfigError> {
        match self.protocol {
            ProtocolKind::Constant => Ok(()),
            ProtocolKind::Linear => {
                let b = require(self.beta, "beta", cmd)?;
                if b > 0.0 {
                    Ok(())
                } else {
                    Err(ConfigError::Validation(format!("`beta` must be positive, got {b}")))
                }
            }
            ProtocolKind::Erf => {
                let d = require(self.duration, "duration", cmd)?;
                if d > 0.0 {
                    Ok(())
                } else {
                    Err(ConfigError::Validation(format!("`duration` must be positive, got {d}")))
                }
            }
        }
    }
}
