//! Error-rate and MI sweeps over an SNR grid.

use super::output::{
    Checkpoints, SweepMetadata, SweepRecord, SweepResult, VcSummary, SCHEMA_VERSION,
};
use super::{DPolicy, MiBackendKind, SweepConfig};
use crate::airlab::{
    average_energy, choose_d, mi_estimate, AwgnChannel, ConstellationTable, DChoiceOptions,
    FyBackend, ShellTables, DEFAULT_TABLE_LIMIT,
};
use crate::error::{Error, Result};
use crate::vc::VoronoiConstellation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Symbols per RNG stream.
const BATCH: u64 = 4096;
/// Batches between stop-rule checks.
const ROUND: u64 = 16;

/// Seed for SNR point `index`, decorrelated from neighbouring points.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Shells beyond the D requirement, for received vectors outside Γ.
const EXTRA_SHELLS: usize = 40;

/// `needed + EXTRA_SHELLS` shells when their counts fit, otherwise `needed`.
fn prepare_shells(n: usize, needed: usize, budget: usize) -> Result<ShellTables> {
    ShellTables::new(n, needed + EXTRA_SHELLS, budget)
        .or_else(|_| ShellTables::new(n, needed, budget))
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {t} workers: {e}")))?
            .install(f),
    }
}

fn metadata(cfg: &SweepConfig, kind: &str, vc: &VoronoiConstellation, es: f64) -> SweepMetadata {
    SweepMetadata {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        threads: cfg.threads,
        vc: VcSummary {
            label: vc.label().to_string(),
            size: vc.size().to_string(),
            beta: 2.0 * vc.log2_size() / vc.dim() as f64,
            es,
            bits_per_symbol: vc.bits_per_symbol().ok(),
        },
        config: cfg.clone(),
    }
}

#[derive(Clone, Copy, Default)]
struct Counts {
    symbols: u64,
    bit_errors: u64,
    bit_errors_sq: u64,
    symbol_errors: u64,
}

impl Counts {
    fn add(mut self, o: Counts) -> Counts {
        self.symbols += o.symbols;
        self.bit_errors += o.bit_errors;
        self.bit_errors_sq += o.bit_errors_sq;
        self.symbol_errors += o.symbol_errors;
        self
    }
}

fn error_batch(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    seed: u64,
    batch: u64,
    count: u64,
) -> Counts {
    let n = vc.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let mut s = vc.scratch();
    let (mut u, mut uh) = (vec![0i64; n], vec![0i64; n]);
    let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
    let labelled = vc.bits_per_symbol().is_ok();
    let mut c = Counts::default();
    for _ in 0..count {
        vc.random_message(&mut rng, &mut u);
        vc.encode_into(&u, &mut s, &mut x);
        ch.sample_into(&x, &mut rng, &mut y);
        vc.decode_into(&y, &mut s, &mut uh);
        if u != uh {
            c.symbol_errors += 1;
            if labelled {
                let e = vc.label_distance(&u, &uh) as u64;
                c.bit_errors += e;
                c.bit_errors_sq += e * e;
            }
        }
    }
    c.symbols = count;
    c
}

/// One error-rate point: rounds of `ROUND` batches until the error target or symbol budget.
fn error_point(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    cfg: &SweepConfig,
    index: usize,
) -> SweepRecord {
    let start = Instant::now();
    let seed = point_seed(cfg.seed, index);
    let bits = vc.bits_per_symbol().ok();
    let batches = cfg.max_symbols.div_ceil(BATCH);
    let mut total = Counts::default();
    let mut next = 0u64;
    let events = |c: &Counts| {
        if bits.is_some() {
            c.bit_errors
        } else {
            c.symbol_errors
        }
    };
    while next < batches && events(&total) < cfg.min_bit_errors {
        let end = (next + ROUND).min(batches);
        let parts: Vec<Counts> = (next..end)
            .into_par_iter()
            .map(|b| error_batch(vc, ch, seed, b, BATCH.min(cfg.max_symbols - b * BATCH)))
            .collect();
        total = parts.into_iter().fold(total, Counts::add);
        next = end;
    }
    let nf = total.symbols as f64;
    let ser = total.symbol_errors as f64 / nf;
    let (ber, ber_stderr) = match bits {
        Some(b) => {
            let mean = total.bit_errors as f64 / nf;
            let var =
                (total.bit_errors_sq as f64 / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
            (Some(mean / b as f64), Some((var / nf).sqrt() / b as f64))
        }
        None => (None, None),
    };
    SweepRecord {
        snr_db: ch.snr_db,
        symbols: total.symbols,
        bit_errors: bits.map(|_| total.bit_errors),
        symbol_errors: Some(total.symbol_errors),
        ber,
        ber_stderr,
        ser: Some(ser),
        ser_stderr: Some((ser * (1.0 - ser) / nf).sqrt()),
        mi: None,
        mi_stderr: None,
        d: None,
        low_confidence: events(&total) < cfg.min_bit_errors,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Uncoded BER/SER per SNR: uniform messages, AWGN, closest-point decoding,
/// bit errors counted through the pseudo-Gray labels.
pub fn run_error_rate_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        let vc = cfg.constellation()?;
        let es = average_energy(&vc, cfg.seed)?;
        let cp = Checkpoints::new(cfg.checkpoint_dir.as_deref(), "ber", &cfg.hash())?;
        let mut records = Vec::with_capacity(cfg.snr_db.len());
        for (i, &snr) in cfg.snr_db.iter().enumerate() {
            if let Some(r) = cp.load(i)? {
                records.push(r);
                continue;
            }
            let ch = AwgnChannel::from_snr(vc.dim(), es, snr)?;
            let r = error_point(&vc, &ch, cfg, i);
            cp.store(i, &r)?;
            records.push(r);
        }
        Ok(SweepResult {
            metadata: metadata(cfg, "ber", &vc, es),
            records,
        })
    })
}

/// MI per SNR with the configured backend; D follows `d_policy`.
pub fn run_mi_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        let vc = cfg.constellation()?;
        let n = vc.dim();
        let es = average_energy(&vc, cfg.seed)?;
        let cp = Checkpoints::new(cfg.checkpoint_dir.as_deref(), "mi", &cfg.hash())?;
        let table = match cfg.mi_backend {
            MiBackendKind::Exact => Some(ConstellationTable::build(&vc, DEFAULT_TABLE_LIMIT)?),
            MiBackendKind::Importance => None,
        };
        let shells = match (cfg.mi_backend, cfg.d_policy) {
            (MiBackendKind::Exact, _) => None,
            (_, DPolicy::Fixed) => Some(prepare_shells(n, cfg.d.unwrap_or(1), cfg.shell_budget)?),
            _ => Some(prepare_shells(n, cfg.d_cap + 1, cfg.shell_budget)?),
        };
        let pick = |snr: f64| -> Result<usize> {
            let ch = AwgnChannel::from_snr(n, es, snr)?;
            let opts = DChoiceOptions {
                probes: cfg.d_probes,
                realizations: cfg.d_realizations,
                cap: cfg.d_cap,
                seed: cfg.seed,
                ..Default::default()
            };
            Ok(choose_d(&vc, &ch, shells.as_ref().unwrap(), &opts)?.d)
        };
        let once = match (cfg.mi_backend, cfg.d_policy) {
            (MiBackendKind::Importance, DPolicy::Once) => Some(pick(cfg.snr_db[0])?),
            (MiBackendKind::Importance, DPolicy::Fixed) => cfg.d,
            _ => None,
        };
        let mut records = Vec::with_capacity(cfg.snr_db.len());
        for (i, &snr) in cfg.snr_db.iter().enumerate() {
            if let Some(r) = cp.load(i)? {
                records.push(r);
                continue;
            }
            let start = Instant::now();
            let ch = AwgnChannel::from_snr(n, es, snr)?;
            let backend = match (&table, &shells) {
                (Some(t), _) => FyBackend::Exact(t),
                (None, Some(tables)) => FyBackend::Importance {
                    tables,
                    d: match once {
                        Some(d) => d,
                        None => pick(snr)?,
                    },
                },
                (None, None) => unreachable!("one backend is always prepared"),
            };
            let est = mi_estimate(&vc, &ch, backend, cfg.mi_samples, point_seed(cfg.seed, i))?;
            let r = SweepRecord {
                snr_db: snr,
                symbols: est.samples as u64,
                bit_errors: None,
                symbol_errors: None,
                ber: None,
                ber_stderr: None,
                ser: None,
                ser_stderr: None,
                mi: Some(est.mi),
                mi_stderr: Some(est.stderr),
                d: est.d,
                low_confidence: false,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            cp.store(i, &r)?;
            records.push(r);
        }
        Ok(SweepResult {
            metadata: metadata(cfg, "mi", &vc, es),
            records,
        })
    })
}
