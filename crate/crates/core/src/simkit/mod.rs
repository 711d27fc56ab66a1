//! Seeded experiments: uncoded error-rate sweeps, MI sweeps and merit tables.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the experiment seed,
//! the SNR index and the batch index, and partial results are combined in batch
//! order, so outputs do not depend on the number of worker threads.

mod config;
mod merits;
mod output;
mod sweep;

pub use config::{
    hash_json, DPolicy, MiBackendKind, OffsetKind, SweepConfig, DEFAULT_MAX_SYMBOLS,
    DEFAULT_MIN_BIT_ERRORS, MIN_ERROR_EVENTS,
};
pub use merits::{merit_row, tabulate_merits, write_merits_csv, MeritOptions, MeritRow};
pub use output::{
    sig12, SweepMetadata, SweepRecord, SweepResult, VcSummary, CSV_HEADER, SCHEMA_VERSION,
};
pub use sweep::{point_seed, run_error_rate_sweep, run_mi_sweep, with_threads};

#[cfg(test)]
mod tests;
