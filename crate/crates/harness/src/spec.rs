//! Flat `key = value` experiment files.
//!
//! ```text
//! # SNR sweep on a 16x16 link with a 120-element surface
//! axis = snr_db
//! values = -20, -10, 0, 10, 20
//! algorithms = scf, random_ris, no_ris
//! seeds = 50
//! n_tx = 16
//! n_rx = 16
//! n_streams = 16
//! n_elements = 120
//! ```
//!
//! Only `axis` and `values` are required.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use ris_core::{ArrayGeometry, ChannelDrawConfig, SystemConfig, Variant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl SpecError {
    fn at(line: usize, field: &str, message: impl Into<String>) -> Self {
        Self { line: Some(line), field: Some(field.to_string()), message: message.into() }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        Self { line: None, field: Some(field.to_string()), message: message.into() }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SnrDb,
    NElements,
    NTx,
    NStreams,
    QuantBits,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] =
        [SweepAxis::SnrDb, SweepAxis::NElements, SweepAxis::NTx, SweepAxis::NStreams, SweepAxis::QuantBits];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NElements => "n_elements",
            SweepAxis::NTx => "n_tx",
            SweepAxis::NStreams => "n_streams",
            SweepAxis::QuantBits => "quant_bits",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s))
    }

    fn integral(self) -> bool {
        self != SweepAxis::SnrDb
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisArray {
    Ula,
    /// Near-square planar array for the requested element count.
    Upa,
}

/// One sweep: a base configuration, the axis to vary, and what to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_streams: usize,
    pub n_elements: usize,
    pub ris_array: RisArray,
    pub n_clusters: usize,
    pub n_paths: usize,
    pub spacing_ratio: f64,
    pub snr_db: f64,
    pub quant_bits: Option<u32>,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub scf_eps: f64,
    pub scf_max_iter: usize,
    pub sdr_trials: usize,
    pub sdr_tol: f64,
    pub sdr_max_iter: usize,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub algorithms: Vec<Variant>,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub output_path: String,
    /// Fill `wall_time_ms`; off by default so reruns are byte-identical.
    pub record_timing: bool,
    /// Points per phase for the brute-force oracle.
    pub oracle_grid: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n_tx: 4,
            n_rx: 4,
            n_streams: 4,
            n_elements: 32,
            ris_array: RisArray::Upa,
            n_clusters: 8,
            n_paths: 10,
            spacing_ratio: 0.5,
            snr_db: 0.0,
            quant_bits: None,
            outer_tol: 1e-4,
            max_outer: 100,
            scf_eps: 1e-4,
            scf_max_iter: 500,
            sdr_trials: 500,
            sdr_tol: 1e-6,
            sdr_max_iter: 5000,
            axis: SweepAxis::SnrDb,
            values: Vec::new(),
            algorithms: vec![Variant::Scf, Variant::RandomRis, Variant::NoRis],
            num_seeds: 10,
            base_seed: 0,
            output_path: "results.csv".into(),
            record_timing: false,
            oracle_grid: 720,
        }
    }
}

/// Parameters of one `(axis value, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub system: SystemConfig,
    pub channel: ChannelDrawConfig,
    pub quant_bits: Option<u32>,
}

impl ExperimentSpec {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SpecError {
            line: None,
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let mut spec = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(SpecError { line: Some(line), field: None, message: "expected `key = value`".into() });
            };
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if !seen.insert(key.clone()) {
                return Err(SpecError::at(line, &key, "duplicate key"));
            }
            spec.set(&key, value).map_err(|m| SpecError::at(line, &key, m))?;
        }
        for required in ["axis", "values"] {
            if !seen.contains(required) {
                return Err(SpecError::field(required, "missing required field"));
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "n_tx" => self.n_tx = count(v)?,
            "n_rx" => self.n_rx = count(v)?,
            "n_streams" => self.n_streams = count(v)?,
            "n_elements" => self.n_elements = count(v)?,
            "ris_array" => {
                self.ris_array = match v.to_ascii_lowercase().as_str() {
                    "ula" => RisArray::Ula,
                    "upa" => RisArray::Upa,
                    _ => return Err(format!("expected `ula` or `upa`, got `{v}`")),
                }
            }
            "n_clusters" => self.n_clusters = count(v)?,
            "n_paths" => self.n_paths = count(v)?,
            "spacing" => self.spacing_ratio = positive(v)?,
            "snr_db" => self.snr_db = real(v)?,
            "quant_bits" => {
                self.quant_bits = match v.to_ascii_lowercase().as_str() {
                    "none" | "off" => None,
                    _ => Some(count(v)? as u32),
                }
            }
            "outer_tol" => self.outer_tol = positive(v)?,
            "max_outer" => self.max_outer = count(v)?,
            "scf_eps" => self.scf_eps = positive(v)?,
            "scf_max_iter" => self.scf_max_iter = count(v)?,
            "sdr_trials" => self.sdr_trials = count(v)?,
            "sdr_tol" => self.sdr_tol = positive(v)?,
            "sdr_max_iter" => self.sdr_max_iter = count(v)?,
            "axis" => self.axis = SweepAxis::parse(v).ok_or_else(|| format!("unknown sweep axis `{v}`"))?,
            "values" => self.values = list(v, real)?,
            "algorithms" => {
                self.algorithms =
                    list(v, |s| Variant::parse(s).ok_or_else(|| format!("unknown algorithm `{s}`")))?
            }
            "seeds" => self.num_seeds = count(v)?,
            "base_seed" => self.base_seed = v.parse().map_err(|_| format!("expected an unsigned integer, got `{v}`"))?,
            "output" => {
                if v.is_empty() {
                    return Err("empty path".into());
                }
                self.output_path = v.to_string()
            }
            "timing" => self.record_timing = v.parse().map_err(|_| format!("expected true or false, got `{v}`"))?,
            "oracle_grid" => self.oracle_grid = count(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.values.is_empty() {
            return Err(SpecError::field("values", "at least one sweep value is required"));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpecError::field("values", "sweep values must be strictly increasing"));
        }
        if self.axis.integral() && self.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(SpecError::field("values", format!("axis `{}` takes positive integers", self.axis.name())));
        }
        if self.algorithms.is_empty() {
            return Err(SpecError::field("algorithms", "at least one algorithm is required"));
        }
        let mut uniq = self.algorithms.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != self.algorithms.len() {
            return Err(SpecError::field("algorithms", "algorithm listed twice"));
        }
        if self.num_seeds == 0 {
            return Err(SpecError::field("seeds", "at least one seed is required"));
        }
        for v in &self.values {
            let cell = self.cell(*v);
            cell.channel.validate().map_err(|e| SpecError::field(self.axis.name(), e.to_string()))?;
            cell.system
                .validate(cell.channel.n_tx, cell.channel.n_rx)
                .map_err(|e| SpecError::field(self.axis.name(), e.to_string()))?;
        }
        Ok(())
    }

    /// Base configuration with the sweep axis set to `value`.
    pub fn cell(&self, value: f64) -> CellConfig {
        let mut s = self.clone();
        match self.axis {
            SweepAxis::SnrDb => s.snr_db = value,
            SweepAxis::NElements => s.n_elements = value as usize,
            SweepAxis::NTx => s.n_tx = value as usize,
            SweepAxis::NStreams => s.n_streams = value as usize,
            SweepAxis::QuantBits => s.quant_bits = Some(value as u32),
        }
        let geometry = match s.ris_array {
            RisArray::Ula => ArrayGeometry::ula(s.n_elements),
            RisArray::Upa => ArrayGeometry::upa_for(s.n_elements),
        }
        .with_spacing(s.spacing_ratio);
        let mut channel = ChannelDrawConfig::new(s.n_tx, s.n_rx, geometry, 0);
        channel.n_clusters = s.n_clusters;
        channel.n_paths = s.n_paths;
        channel.terminal_spacing_ratio = s.spacing_ratio;
        CellConfig { system: SystemConfig::from_snr_db(s.n_streams, s.snr_db), channel, quant_bits: s.quant_bits }
    }
}

fn count(v: &str) -> Result<usize, String> {
    match v.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{v}`")),
    }
}

fn real(v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a number, got `{v}`")),
    }
}

fn positive(v: &str) -> Result<f64, String> {
    match real(v)? {
        x if x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got `{v}`")),
    }
}

fn list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}
