//! AWGN channel, marginal density `f_Y`, mutual information and bit LLRs.
//!
//! Densities are handled in the log domain throughout. Exact quantities scan
//! a [`ConstellationTable`]; importance estimates walk integer shells around
//! `⌊y + a⌉` and keep the points that fall in Γ.

mod channel;
mod density;
mod export;
mod llr;
mod mi;
mod qam;
mod table;

pub use channel::{average_energy, AwgnChannel};
pub use density::{
    choose_d, fy_exact, fy_importance, DChoice, DChoiceOptions, FyShells, ShellTables,
    DEFAULT_SHELL_BUDGET,
};
pub use export::{
    read_llr_binary, write_llr_binary, write_llr_csv, LlrRecord, LLR_MAGIC, LLR_VERSION,
};
pub use llr::{llr_approx, llr_exact, BallOffsets, LlrParams, EXACT_LLR_CLAMP};
pub use mi::{mi_estimate, mi_paired, FyBackend, MiEstimate, PairedMi};
pub use qam::{
    awgn_capacity, gap_to_capacity_db, pam_mi, qam_baseline_levels, qam_mi, snr_for_qam_mi,
};
pub use table::{ConstellationTable, DEFAULT_TABLE_LIMIT};

#[cfg(test)]
mod tests;
