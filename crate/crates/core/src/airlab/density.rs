//! Exact and shell-based importance estimates of `f_Y(y)`, and the choice of D.

use super::{AwgnChannel, ConstellationTable};
use crate::error::{contract, Error, Result};
use crate::lattices::quantizers::round_half_down;
use crate::shells::{for_each_shell_point, shell_cardinality, ShellSampler};
use crate::vc::{Scratch, VoronoiConstellation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Default per-shell budget `K_d`: shells up to this size are enumerated, larger ones sampled.
pub const DEFAULT_SHELL_BUDGET: usize = 10_000;

/// Terms below `e^{−(ln M + EXACT_MARGIN)}` of the largest are dropped from exact sums.
const EXACT_MARGIN: f64 = 40.0;

/// Exact `ln f_Y(y)` by scanning every constellation point.
pub fn fy_exact(table: &ConstellationTable, ch: &AwgnChannel, y: &[f64]) -> f64 {
    let v = ch.variance();
    let (d0, ln_sum) = table.log_sum_exp(y, v, table.log_size() + EXACT_MARGIN);
    -ch.log_normalizer() - table.log_size() - d0 / (2.0 * v) + ln_sum
}

#[derive(Clone, Debug)]
struct ShellEntry {
    r2: u64,
    size: u64,
    /// Flat list of shell vectors when `size ≤ budget`.
    points: Option<Vec<i64>>,
    sampler: Option<ShellSampler>,
}

/// Integer shells `r² = 0, 1, …` prepared for importance estimation.
#[derive(Clone, Debug)]
pub struct ShellTables {
    n: usize,
    budget: usize,
    shells: Vec<ShellEntry>,
}

impl ShellTables {
    /// Prepares `max_shells` shells in dimension `n` with per-shell budget `budget`.
    pub fn new(n: usize, max_shells: usize, budget: usize) -> Result<Self> {
        if budget == 0 {
            return Err(contract("shell budget must be positive"));
        }
        let mut shells = Vec::with_capacity(max_shells);
        for r2 in 0..max_shells as u64 {
            let size = shell_cardinality(n, r2)?;
            let (points, sampler) = if size <= budget as u64 {
                let mut flat = Vec::with_capacity(size as usize * n);
                for_each_shell_point(n, r2, |v| flat.extend_from_slice(v))?;
                (Some(flat), None)
            } else {
                (None, Some(ShellSampler::new(n, r2)?))
            };
            shells.push(ShellEntry {
                r2,
                size,
                points,
                sampler,
            });
        }
        Ok(ShellTables { n, budget, shells })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Number of prepared shells.
    pub fn max_shells(&self) -> usize {
        self.shells.len()
    }

    /// `|B(y, √(d−1))|`: integer points in the first `d` shells.
    pub fn ball_size(&self, d: usize) -> u64 {
        self.shells[..d].iter().map(|s| s.size).sum()
    }

    /// True when shell `d` (zero-based) is sampled rather than enumerated.
    pub fn is_sampled(&self, d: usize) -> bool {
        self.shells[d].points.is_none()
    }
}

/// Per-shell contributions to `f_Y(y)`, scaled by `exp(−log_ref)`.
#[derive(Clone, Debug)]
pub struct FyShells {
    /// `−ln p − ln M − ‖y + a − ⌊y + a⌉‖²/(2v)`.
    pub log_ref: f64,
    /// Contribution of shell `r² = d` at index `d`.
    pub terms: Vec<f64>,
    /// Index of the first shell holding a constellation point.
    first: Option<usize>,
    center: Vec<i64>,
    frac: Vec<f64>,
}

impl FyShells {
    fn start(vc: &VoronoiConstellation, ch: &AwgnChannel, y: &[f64]) -> Self {
        let a = vc.offset();
        let mut center = Vec::with_capacity(y.len());
        let mut frac = Vec::with_capacity(y.len());
        for (yi, ai) in y.iter().zip(a) {
            let z = yi + ai;
            let c = round_half_down(z);
            center.push(c as i64);
            frac.push(z - c);
        }
        let d0: f64 = frac.iter().map(|e| e * e).sum();
        FyShells {
            log_ref: -ch.log_normalizer() - vc.log2_size() * LN_2 - d0 / (2.0 * ch.variance()),
            terms: Vec::new(),
            first: None,
            center,
            frac,
        }
    }

    fn push_shell<R: Rng + ?Sized>(
        &mut self,
        vc: &VoronoiConstellation,
        tables: &ShellTables,
        ch: &AwgnChannel,
        rng: &mut R,
        s: &mut Scratch,
        x: &mut [f64],
        v: &mut [i64],
    ) -> Result<()> {
        let shell = tables
            .shells
            .get(self.terms.len())
            .ok_or_else(|| contract("not enough prepared shells"))?;
        let n = tables.n;
        let a = vc.offset();
        let inv = 1.0 / (2.0 * ch.variance());
        let r2 = shell.r2 as f64;
        let weight = |sv: &[i64], s: &mut Scratch, x: &mut [f64]| -> f64 {
            let mut dot = 0.0;
            for i in 0..n {
                x[i] = (self.center[i] + sv[i]) as f64 - a[i];
                dot += self.frac[i] * sv[i] as f64;
            }
            if vc.in_region(x, s) {
                (-(r2 - 2.0 * dot) * inv).exp()
            } else {
                0.0
            }
        };
        let term = match (&shell.points, &shell.sampler) {
            (Some(flat), _) => flat.chunks_exact(n.max(1)).map(|sv| weight(sv, s, x)).sum(),
            (None, Some(sampler)) if sampler.is_nonempty() => {
                let k = tables.budget;
                let mut acc = 0.0;
                for _ in 0..k {
                    sampler.sample_into(rng, v);
                    acc += weight(v, s, x);
                }
                acc * shell.size as f64 / k as f64
            }
            _ => 0.0,
        };
        if self.first.is_none() && term > 0.0 {
            self.first = Some(self.terms.len());
        }
        self.terms.push(term);
        Ok(())
    }

    /// Shells needed for `d` shells counted from the first occupied one; unknown before any hit.
    fn target(&self, d: usize) -> Option<usize> {
        self.first.map(|f| f + d)
    }

    /// Index of the first shell that met a constellation point.
    pub fn first_occupied(&self) -> Option<usize> {
        self.first
    }

    /// Number of shells evaluated.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `ln f_Y^{(d)}(y)` from the first `d` shells.
    pub fn log_fy(&self, d: usize) -> f64 {
        self.log_ref + self.terms[..d].iter().sum::<f64>().ln()
    }

    /// `(f^{(d+1)} − f^{(d)}) / f^{(d)}`; infinite while `f^{(d)}` is zero.
    pub fn relative_increment(&self, d: usize) -> f64 {
        let base: f64 = self.terms[..d].iter().sum();
        if base > 0.0 {
            self.terms[d] / base
        } else {
            f64::INFINITY
        }
    }
}

/// Importance estimate of `f_Y(y)` from `d` shells around `⌊y + a⌉`.
///
/// Shells up to the budget are enumerated and filtered by Γ membership. Larger
/// shells receive `K` uniform draws and contribute `(|S_d|/K)·Σ_accepted f(y|x)`.
/// The `d` shells are counted from the first shell that holds a point of Γ, which
/// is `r² = 0` whenever `⌊y + a⌉ − a` lies in Γ; use `log_fy(len())` on the result.
pub fn fy_importance<R: Rng + ?Sized>(
    vc: &VoronoiConstellation,
    tables: &ShellTables,
    ch: &AwgnChannel,
    y: &[f64],
    d: usize,
    rng: &mut R,
) -> Result<FyShells> {
    if d == 0 {
        return Err(contract("D must be at least 1"));
    }
    if tables.n != vc.dim() || y.len() != vc.dim() {
        return Err(contract(
            "dimension mismatch between constellation, shells and y",
        ));
    }
    let mut f = FyShells::start(vc, ch, y);
    let mut s = vc.scratch();
    let mut x = vec![0.0; vc.dim()];
    let mut v = vec![0i64; vc.dim()];
    while f.target(d).is_none_or(|t| f.len() < t) {
        if f.len() == tables.max_shells() {
            return Err(contract(format!(
                "{} prepared shells hold too few constellation points around y",
                tables.max_shells()
            )));
        }
        f.push_shell(vc, tables, ch, rng, &mut s, &mut x, &mut v)?;
    }
    Ok(f)
}

/// Settings for [`choose_d`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DChoiceOptions {
    /// Random received vectors.
    pub probes: usize,
    /// Independent Monte Carlo realizations per probe.
    pub realizations: usize,
    /// Largest admissible D.
    pub cap: usize,
    /// Bound on the relative increment.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for DChoiceOptions {
    fn default() -> Self {
        DChoiceOptions {
            probes: 10,
            realizations: 5,
            cap: 40,
            threshold: 0.005,
            seed: 0,
        }
    }
}

/// Outcome of [`choose_d`].
#[derive(Clone, Debug, PartialEq)]
pub struct DChoice {
    pub d: usize,
    /// Worst relative increment for `D = 1, …, d`.
    pub worst_increments: Vec<f64>,
    /// `|B(y, √(d−1))|`.
    pub ball_size: u64,
}

/// Smallest D whose worst relative increment over probes and realizations is below the threshold.
pub fn choose_d(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    tables: &ShellTables,
    opts: &DChoiceOptions,
) -> Result<DChoice> {
    if opts.probes == 0 || opts.realizations == 0 || opts.cap == 0 {
        return Err(contract(
            "choose_d needs probes, realizations and cap above zero",
        ));
    }
    if tables.max_shells() < opts.cap + 1 {
        return Err(contract(format!(
            "choose_d with cap {} needs {} shells",
            opts.cap,
            opts.cap + 1
        )));
    }
    let n = vc.dim();
    struct State {
        f: FyShells,
        rng: ChaCha8Rng,
    }
    let mut states = Vec::with_capacity(opts.probes * opts.realizations);
    for p in 0..opts.probes {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(p as u64);
        let mut u = vec![0i64; n];
        vc.random_message(&mut rng, &mut u);
        let x = vc.encode(&u)?;
        let mut y = vec![0.0; n];
        ch.sample_into(&x, &mut rng, &mut y);
        for r in 0..opts.realizations {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream((opts.probes + p * opts.realizations + r) as u64);
            states.push(State {
                f: FyShells::start(vc, ch, &y),
                rng,
            });
        }
    }
    let mut worst_increments = Vec::new();
    for d in 1..=opts.cap {
        let worst = states
            .par_iter_mut()
            .map(|st| -> Result<f64> {
                let mut s = vc.scratch();
                let mut x = vec![0.0; n];
                let mut v = vec![0i64; n];
                while st.f.target(d).is_none_or(|t| st.f.len() < t + 1) {
                    if st.f.len() == tables.max_shells() {
                        return Ok(f64::INFINITY);
                    }
                    st.f.push_shell(vc, tables, ch, &mut st.rng, &mut s, &mut x, &mut v)?;
                }
                Ok(st.f.relative_increment(st.f.target(d).unwrap()))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, |acc: f64, v| {
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    acc.max(v)
                }
            });
        worst_increments.push(worst);
        if worst < opts.threshold {
            return Ok(DChoice {
                d,
                worst_increments,
                ball_size: tables.ball_size(d),
            });
        }
    }
    Err(Error::NonConvergence {
        cap: opts.cap,
        worst: *worst_increments.last().unwrap(),
    })
}
