//! Sweep configuration: a flat TOML table with validated defaults.

use crate::error::{Error, Result};
use crate::vc::{Mapping, OffsetPolicy, VoronoiConstellation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Default symbol budget per SNR point.
pub const DEFAULT_MAX_SYMBOLS: u64 = 10_000_000;
/// Default number of bit-error events per SNR point.
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;
/// Smallest admissible error-event target.
pub const MIN_ERROR_EVENTS: u64 = 100;

/// How the importance estimator picks its shell count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DPolicy {
    /// Chosen once at the lowest SNR and reused.
    Once,
    /// Chosen separately at every SNR.
    PerSnr,
    /// The value of `d`.
    Fixed,
}

/// `f_Y` evaluation for MI sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiBackendKind {
    Importance,
    Exact,
}

/// Dither selection, mirroring [`OffsetPolicy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetKind {
    Auto,
    Random,
    Optimized,
    /// Use `offset_values`.
    Exact,
}

fn default_max_symbols() -> u64 {
    DEFAULT_MAX_SYMBOLS
}
fn default_min_bit_errors() -> u64 {
    DEFAULT_MIN_BIT_ERRORS
}
fn default_offset() -> OffsetKind {
    OffsetKind::Auto
}
fn default_d_policy() -> DPolicy {
    DPolicy::Once
}
fn default_d_cap() -> usize {
    40
}
fn default_shell_budget() -> usize {
    crate::airlab::DEFAULT_SHELL_BUDGET
}
fn default_mi_samples() -> usize {
    10_000
}
fn default_mi_backend() -> MiBackendKind {
    MiBackendKind::Importance
}
fn default_d_probes() -> usize {
    10
}
fn default_d_realizations() -> usize {
    5
}

/// One experiment: constellation, SNR grid, stop rule, estimator options and outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Constellation spec such as `Z4/16D4`.
    pub vc: String,
    /// Mapping name; the constellation default when absent.
    #[serde(default)]
    pub mapping: Option<String>,
    #[serde(default = "default_offset")]
    pub offset: OffsetKind,
    #[serde(default)]
    pub offset_values: Option<Vec<f64>>,
    /// SNR grid in dB, strictly increasing.
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_symbols")]
    pub max_symbols: u64,
    #[serde(default = "default_min_bit_errors")]
    pub min_bit_errors: u64,
    #[serde(default = "default_d_policy")]
    pub d_policy: DPolicy,
    /// Shell count for `d_policy = "fixed"`.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default = "default_d_cap")]
    pub d_cap: usize,
    #[serde(default = "default_d_probes")]
    pub d_probes: usize,
    #[serde(default = "default_d_realizations")]
    pub d_realizations: usize,
    /// Per-shell budget `K_d`.
    #[serde(default = "default_shell_budget")]
    pub shell_budget: usize,
    #[serde(default = "default_mi_samples")]
    pub mi_samples: usize,
    #[serde(default = "default_mi_backend")]
    pub mi_backend: MiBackendKind,
    #[serde(default)]
    pub llr_r2: Option<u64>,
    #[serde(default)]
    pub llr_q: Option<f64>,
    #[serde(default)]
    pub output_csv: Option<PathBuf>,
    #[serde(default)]
    pub output_json: Option<PathBuf>,
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Worker threads; the global pool when absent.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SweepConfig {
    /// A configuration with defaults for everything but the constellation and grid.
    pub fn new(vc: &str, snr_db: Vec<f64>) -> Self {
        SweepConfig {
            vc: vc.to_string(),
            mapping: None,
            offset: default_offset(),
            offset_values: None,
            snr_db,
            seed: 0,
            max_symbols: DEFAULT_MAX_SYMBOLS,
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            d_policy: default_d_policy(),
            d: None,
            d_cap: default_d_cap(),
            d_probes: default_d_probes(),
            d_realizations: default_d_realizations(),
            shell_budget: default_shell_budget(),
            mi_samples: default_mi_samples(),
            mi_backend: default_mi_backend(),
            llr_r2: None,
            llr_q: None,
            output_csv: None,
            output_json: None,
            checkpoint_dir: None,
            threads: None,
        }
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.snr_db.is_empty() {
            return bad("snr_db must list at least one SNR".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_db entries must be finite".into());
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("snr_db must be strictly increasing".into());
        }
        if self.min_bit_errors < MIN_ERROR_EVENTS {
            return bad(format!(
                "min_bit_errors must be at least {MIN_ERROR_EVENTS}"
            ));
        }
        if self.max_symbols == 0 {
            return bad("max_symbols must be positive".into());
        }
        if self.d_policy == DPolicy::Fixed && !self.d.is_some_and(|d| d > 0) {
            return bad("d_policy = \"fixed\" needs d ≥ 1".into());
        }
        if self.d_cap == 0
            || self.d_probes == 0
            || self.d_realizations == 0
            || self.shell_budget == 0
        {
            return bad("d_cap, d_probes, d_realizations and shell_budget must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if self.offset == OffsetKind::Exact && self.offset_values.is_none() {
            return bad("offset = \"exact\" needs offset_values".into());
        }
        if let Some(m) = &self.mapping {
            Mapping::parse(m)?;
        }
        if let (Some(r2), Some(q)) = (self.llr_r2, self.llr_q) {
            if !(q > r2 as f64) {
                return bad("llr_q must exceed llr_r2".into());
            }
        }
        Ok(())
    }

    pub fn offset_policy(&self) -> OffsetPolicy {
        match self.offset {
            OffsetKind::Auto => OffsetPolicy::Auto { seed: self.seed },
            OffsetKind::Random => OffsetPolicy::Random { seed: self.seed },
            OffsetKind::Optimized => OffsetPolicy::Optimized {
                seed: self.seed,
                starts: 4,
            },
            OffsetKind::Exact => {
                OffsetPolicy::Exact(self.offset_values.clone().unwrap_or_default())
            }
        }
    }

    /// Builds the constellation described by `vc`, `mapping` and `offset`.
    pub fn constellation(&self) -> Result<VoronoiConstellation> {
        let mapping = self.mapping.as_deref().map(Mapping::parse).transpose()?;
        VoronoiConstellation::from_spec(&self.vc, mapping, self.offset_policy())
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring output paths and the worker count.
    pub fn hash(&self) -> String {
        let mut core = self.clone();
        core.output_csv = None;
        core.output_json = None;
        core.checkpoint_dir = None;
        core.threads = None;
        hash_json(&core)
    }
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
