//! Sweep records, metadata, CSV/JSON writers and per-point checkpoints.

use super::SweepConfig;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Version of the CSV/JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Results at one SNR.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub symbols: u64,
    /// Absent when the constellation has no bit labels.
    pub bit_errors: Option<u64>,
    pub symbol_errors: Option<u64>,
    pub ber: Option<f64>,
    pub ber_stderr: Option<f64>,
    pub ser: Option<f64>,
    pub ser_stderr: Option<f64>,
    pub mi: Option<f64>,
    pub mi_stderr: Option<f64>,
    pub d: Option<usize>,
    /// The stop rule ended on the symbol budget before reaching the error target.
    pub low_confidence: bool,
    pub wall_time_s: f64,
}

/// Merits of the swept constellation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VcSummary {
    pub label: String,
    pub size: String,
    pub beta: f64,
    pub es: f64,
    pub bits_per_symbol: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub schema_version: u32,
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub threads: Option<usize>,
    pub vc: VcSummary,
    pub config: SweepConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub records: Vec<SweepRecord>,
}

/// 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn optf(v: Option<f64>) -> String {
    v.map(sig12).unwrap_or_default()
}

/// CSV columns, one row per SNR point.
pub const CSV_HEADER: [&str; 13] = [
    "snr_db",
    "symbols",
    "bit_errors",
    "symbol_errors",
    "ber",
    "ber_stderr",
    "ser",
    "ser_stderr",
    "mi",
    "mi_stderr",
    "d",
    "low_confidence",
    "wall_time_s",
];

impl SweepResult {
    /// CSV preceded by `#`-comment lines carrying schema version, seed, code version and config hash.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.metadata;
        writeln!(
            w,
            "# schema_version={} kind={} version={}",
            m.schema_version, m.kind, m.version
        )?;
        writeln!(
            w,
            "# vc={} seed={} config_hash={}",
            m.vc.label, m.seed, m.config_hash
        )?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_HEADER)?;
        for r in &self.records {
            wr.write_record([
                sig12(r.snr_db),
                r.symbols.to_string(),
                opt(&r.bit_errors),
                opt(&r.symbol_errors),
                optf(r.ber),
                optf(r.ber_stderr),
                optf(r.ser),
                optf(r.ser_stderr),
                optf(r.mi),
                optf(r.mi_stderr),
                opt(&r.d),
                r.low_confidence.to_string(),
                format!("{:.3}", r.wall_time_s),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Writes the outputs named in the configuration.
    pub fn write_outputs(&self) -> Result<()> {
        let cfg = &self.metadata.config;
        if let Some(p) = &cfg.output_csv {
            self.write_csv(std::io::BufWriter::new(std::fs::File::create(p)?))?;
        }
        if let Some(p) = &cfg.output_json {
            let mut f = std::io::BufWriter::new(std::fs::File::create(p)?);
            self.write_json(&mut f)?;
            f.flush()?;
        }
        Ok(())
    }

    /// Records with wall times zeroed, for determinism comparisons.
    pub fn payload(&self) -> Vec<SweepRecord> {
        self.records
            .iter()
            .map(|r| SweepRecord {
                wall_time_s: 0.0,
                ..r.clone()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    kind: String,
    config_hash: String,
    index: usize,
    record: SweepRecord,
}

/// Per-SNR checkpoint files in a directory.
pub(crate) struct Checkpoints {
    dir: Option<PathBuf>,
    kind: String,
    hash: String,
}

impl Checkpoints {
    pub(crate) fn new(dir: Option<&Path>, kind: &str, hash: &str) -> Result<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Checkpoints {
            dir: dir.map(Path::to_path_buf),
            kind: kind.to_string(),
            hash: hash.to_string(),
        })
    }

    fn path(&self, index: usize) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{}-{index:04}.json", self.kind)))
    }

    /// A stored record for this point, if one exists for the same configuration.
    pub(crate) fn load(&self, index: usize) -> Result<Option<SweepRecord>> {
        let Some(p) = self.path(index) else {
            return Ok(None);
        };
        if !p.exists() {
            return Ok(None);
        }
        let c: Checkpoint = serde_json::from_slice(&std::fs::read(&p)?)?;
        if c.kind != self.kind || c.config_hash != self.hash || c.index != index {
            return Err(Error::Config(format!(
                "checkpoint {} belongs to a different configuration",
                p.display()
            )));
        }
        Ok(Some(c.record))
    }

    pub(crate) fn store(&self, index: usize, record: &SweepRecord) -> Result<()> {
        let Some(p) = self.path(index) else {
            return Ok(());
        };
        let tmp = p.with_extension("json.tmp");
        let c = Checkpoint {
            kind: self.kind.clone(),
            config_hash: self.hash.clone(),
            index,
            record: record.clone(),
        };
        std::fs::write(&tmp, serde_json::to_vec_pretty(&c)?)?;
        std::fs::rename(&tmp, &p)?;
        Ok(())
    }
}
