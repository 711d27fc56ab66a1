//! Monte Carlo mutual information `E[log₂ f(y|x)/f_Y(y)]`.

use super::{fy_exact, fy_importance, AwgnChannel, ConstellationTable, ShellTables};
use crate::error::{contract, Result};
use crate::vc::VoronoiConstellation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::LN_2;

/// Smallest admissible number of symbols.
const MIN_SAMPLES: usize = 1000;
const CHUNK: usize = 64;

/// How `f_Y` is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum FyBackend<'a> {
    Exact(&'a ConstellationTable),
    Importance { tables: &'a ShellTables, d: usize },
}

/// MI in bits per symbol per dimension pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiEstimate {
    pub snr_db: f64,
    pub mi: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Shell count for importance estimates.
    pub d: Option<usize>,
}

/// Exact and importance estimates on the same received vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedMi {
    pub exact: MiEstimate,
    pub importance: MiEstimate,
    /// Standard error of the per-symbol difference.
    pub diff_stderr: f64,
}

/// Moments of per-symbol log-ratios (nats) for up to two backends.
#[derive(Clone, Copy, Default)]
struct Moments {
    s: [f64; 2],
    s2: [f64; 2],
    diff: f64,
    diff2: f64,
}

impl Moments {
    fn merge(mut self, o: Moments) -> Moments {
        for k in 0..2 {
            self.s[k] += o.s[k];
            self.s2[k] += o.s2[k];
        }
        self.diff += o.diff;
        self.diff2 += o.diff2;
        self
    }
}

fn mean_stderr(s: f64, s2: f64, ns: usize, scale: f64) -> (f64, f64) {
    let nf = ns as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    (mean * scale, (var / nf).sqrt() * scale)
}

/// Runs `ns` symbols; channel draws use even streams, importance draws odd streams,
/// so every backend sees the same `(x, y)` sequence for a seed.
fn run(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    backends: &[FyBackend],
    ns: usize,
    seed: u64,
) -> Result<Moments> {
    if ns < MIN_SAMPLES {
        return Err(contract(format!(
            "MI estimation needs at least {MIN_SAMPLES} symbols"
        )));
    }
    let n = vc.dim();
    let chunks = ns.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Moments> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * c as u64);
            let mut irng = ChaCha8Rng::seed_from_u64(seed);
            irng.set_stream(2 * c as u64 + 1);
            let mut s = vc.scratch();
            let mut u = vec![0i64; n];
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            let mut m = Moments::default();
            for _ in 0..CHUNK.min(ns - c * CHUNK) {
                vc.random_message(&mut rng, &mut u);
                vc.encode_into(&u, &mut s, &mut x);
                ch.sample_into(&x, &mut rng, &mut y);
                let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
                let log_cond = ch.log_density(d2);
                let mut vals = [0.0; 2];
                for (k, b) in backends.iter().enumerate() {
                    let log_fy = match *b {
                        FyBackend::Exact(t) => fy_exact(t, ch, &y),
                        FyBackend::Importance { tables, d } => {
                            let f = fy_importance(vc, tables, ch, &y, d, &mut irng)?;
                            f.log_fy(f.len())
                        }
                    };
                    vals[k] = log_cond - log_fy;
                    m.s[k] += vals[k];
                    m.s2[k] += vals[k] * vals[k];
                }
                let diff = vals[0] - vals[1];
                m.diff += diff;
                m.diff2 += diff * diff;
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()
        .map(|parts| parts.into_iter().fold(Moments::default(), Moments::merge))
}

fn check(vc: &VoronoiConstellation, ch: &AwgnChannel) -> Result<()> {
    if ch.n != vc.dim() {
        return Err(contract("channel and constellation dimensions differ"));
    }
    Ok(())
}

fn estimate(ch: &AwgnChannel, m: &Moments, k: usize, ns: usize, d: Option<usize>) -> MiEstimate {
    let scale = 2.0 / (ch.n as f64 * LN_2);
    let (mi, stderr) = mean_stderr(m.s[k], m.s2[k], ns, scale);
    MiEstimate {
        snr_db: ch.snr_db,
        mi,
        stderr,
        samples: ns,
        d,
    }
}

/// MI from `ns` uniform symbols with the chosen `f_Y` backend.
pub fn mi_estimate(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    backend: FyBackend,
    ns: usize,
    seed: u64,
) -> Result<MiEstimate> {
    check(vc, ch)?;
    let m = run(vc, ch, &[backend], ns, seed)?;
    let d = match backend {
        FyBackend::Importance { d, .. } => Some(d),
        FyBackend::Exact(_) => None,
    };
    Ok(estimate(ch, &m, 0, ns, d))
}

/// Exact and importance MI evaluated on identical symbols.
pub fn mi_paired(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    table: &ConstellationTable,
    tables: &ShellTables,
    d: usize,
    ns: usize,
    seed: u64,
) -> Result<PairedMi> {
    check(vc, ch)?;
    let m = run(
        vc,
        ch,
        &[FyBackend::Exact(table), FyBackend::Importance { tables, d }],
        ns,
        seed,
    )?;
    let scale = 2.0 / (ch.n as f64 * LN_2);
    Ok(PairedMi {
        exact: estimate(ch, &m, 0, ns, None),
        importance: estimate(ch, &m, 1, ns, Some(d)),
        diff_stderr: mean_stderr(m.diff, m.diff2, ns, scale).1,
    })
}
