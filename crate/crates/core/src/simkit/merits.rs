//! Spectral efficiency and gain tables across constellations.

use crate::error::Result;
use crate::lattices::{reference_shaping_gain_db, Lattice};
use crate::vc::{GrayPenaltyMode, OffsetPolicy, VoronoiConstellation};
use num_bigint::BigUint;
use serde::Serialize;
use std::io::Write;

/// One row of the merit table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeritRow {
    pub vc: String,
    pub n: usize,
    pub m: i64,
    pub rotated: bool,
    /// Constellation size M in decimal.
    pub size: String,
    /// `2·log₂(M)/n`.
    pub beta: f64,
    /// `(2·log₂ M, n)` when M is a power of two.
    pub beta_exact: Option<(u64, u64)>,
    /// `2·log₂(V(Λs)/V(Λc))/n + 2·log₂ m`, plus 1 when rotated.
    pub beta_formula: f64,
    /// `M·V(Λc) = mⁿ·V(Λs)·2^{n/2·rot}` holds in integer arithmetic.
    pub size_identity: bool,
    pub es: f64,
    pub es_stderr: f64,
    /// Gain over PAM at equal β, dB.
    pub gain_db: f64,
    pub gain_stderr_db: f64,
    /// Asymptotic shaping gain of the shaping lattice, when tabulated.
    pub gs_asymptote_db: Option<f64>,
    pub gray_penalty: Option<f64>,
}

/// Options for [`tabulate_merits`].
#[derive(Clone, Copy, Debug)]
pub struct MeritOptions {
    pub mc_samples: usize,
    pub seed: u64,
    pub gray: Option<GrayPenaltyMode>,
}

impl Default for MeritOptions {
    fn default() -> Self {
        MeritOptions {
            mc_samples: 1_000_000,
            seed: 0,
            gray: None,
        }
    }
}

/// `|det|` of `denom·Λ` (lower triangular) and `denomⁿ`.
fn scaled_volume(l: &Lattice) -> (BigUint, BigUint) {
    let det = l
        .integer_basis()
        .diag()
        .iter()
        .fold(BigUint::from(1u32), |acc, &d| {
            acc * BigUint::from(d.unsigned_abs())
        });
    (
        det,
        BigUint::from(l.denom().unsigned_abs()).pow(l.dim() as u32),
    )
}

fn log2_big(v: &BigUint) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(60);
    let top = u64::try_from(v >> shift).unwrap() as f64;
    top.log2() + shift as f64
}

/// Merit row of one constellation.
pub fn merit_row(vc: &VoronoiConstellation, spec: &str, opts: &MeritOptions) -> Result<MeritRow> {
    let n = vc.dim();
    let report = vc.merit_report(opts.mc_samples, opts.seed, opts.gray)?;
    let sh = vc.shaping();
    let (m, rotated) = (sh.scale(), sh.rotated());
    let (dc, qc) = scaled_volume(vc.coding());
    let (ds, qs) = scaled_volume(sh.base());
    // M·det_c/qc = mⁿ·det_s/qs·2^{n/2·rot}, cleared of denominators.
    let rot = if rotated {
        BigUint::from(1u32) << (n / 2)
    } else {
        BigUint::from(1u32)
    };
    let lhs = vc.size() * &dc * &qs;
    let rhs = BigUint::from(m as u64).pow(n as u32) * &ds * &qc * rot;
    let vol_ratio = log2_big(&ds) - log2_big(&qs) - log2_big(&dc) + log2_big(&qc);
    let beta_formula =
        2.0 * vol_ratio / n as f64 + 2.0 * (m as f64).log2() + if rotated { 1.0 } else { 0.0 };
    Ok(MeritRow {
        vc: spec.to_string(),
        n,
        m,
        rotated,
        size: vc.size().to_string(),
        beta: report.beta,
        beta_exact: report.beta_exact,
        beta_formula,
        size_identity: lhs == rhs,
        es: report.es,
        es_stderr: report.es_stderr,
        gain_db: report.gain_db,
        gain_stderr_db: 10.0 / std::f64::consts::LN_10 * report.es_stderr / report.es,
        gs_asymptote_db: sh
            .base()
            .name()
            .map(reference_shaping_gain_db)
            .filter(|g| g.is_finite()),
        gray_penalty: report.gray_penalty,
    })
}

/// Rows for every spec, each with an automatically chosen dither.
pub fn tabulate_merits(specs: &[String], opts: &MeritOptions) -> Result<Vec<MeritRow>> {
    specs
        .iter()
        .map(|s| {
            let vc =
                VoronoiConstellation::from_spec(s, None, OffsetPolicy::Auto { seed: opts.seed })?;
            merit_row(&vc, s, opts)
        })
        .collect()
}

/// CSV with one row per constellation; floats at 12 significant digits.
pub fn write_merits_csv<W: Write>(w: W, rows: &[MeritRow]) -> Result<()> {
    let f = super::output::sig12;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "vc",
        "n",
        "m",
        "rotated",
        "size",
        "beta",
        "beta_exact",
        "beta_formula",
        "size_identity",
        "es",
        "es_stderr",
        "gain_db",
        "gain_stderr_db",
        "gs_asymptote_db",
        "gray_penalty",
    ])?;
    for r in rows {
        wr.write_record([
            r.vc.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.rotated.to_string(),
            r.size.clone(),
            f(r.beta),
            r.beta_exact
                .map(|(a, b)| format!("{a}/{b}"))
                .unwrap_or_default(),
            f(r.beta_formula),
            r.size_identity.to_string(),
            f(r.es),
            f(r.es_stderr),
            f(r.gain_db),
            f(r.gain_stderr_db),
            r.gs_asymptote_db.map(f).unwrap_or_default(),
            r.gray_penalty.map(f).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
