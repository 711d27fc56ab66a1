//! Every constellation point in compact integer form, for exact scans.
//!
//! Points are stored coordinate-major in blocks of [`BLOCK`] so distances to a
//! whole block are computed lane-parallel in `f32`. Points that survive the
//! `f32` prefilter are re-measured in `f64` before they enter any sum.

use crate::error::{contract, Error, Result};
use crate::vc::VoronoiConstellation;
use rayon::prelude::*;

/// Default largest constellation stored in a table.
pub const DEFAULT_TABLE_LIMIT: u64 = 1 << 24;

/// Largest table footprint in bytes.
const MEMORY_GUARD: u64 = 2 << 30;

/// Points per coordinate-major block.
const BLOCK: usize = 64;

/// Blocks per parallel work item.
const BLOCKS_PER_TASK: usize = 1024;

/// Extra exponent window kept beyond `cutoff + ln M` in the single-pass scan.
const SLACK: f64 = 40.0;

/// Points `x` of Γ stored as `denom·(x + a)` in `i16`, with optional packed labels.
#[derive(Clone, Debug)]
pub struct ConstellationTable {
    n: usize,
    len: usize,
    denom: f64,
    offset: Vec<f64>,
    blocks: Blocks,
    labels: Option<Vec<u64>>,
    bits: usize,
    log_m: f64,
    /// Largest stored coordinate magnitude.
    reach: f64,
}

/// Blocks of `n × BLOCK` coordinates, lane `l` of coordinate `j` at `j·BLOCK + l`.
/// Padding lanes repeat the first point.
#[derive(Clone, Debug)]
enum Blocks {
    Narrow(Vec<i8>),
    Wide(Vec<i16>),
}

/// Stored coordinate type.
trait Coord: Copy + Into<f32> + Into<f64> + Send + Sync {}
impl Coord for i8 {}
impl Coord for i16 {}

/// Exact minimum found among prefiltered points, the `f32` minimum, and the accumulator.
struct Pass<T> {
    exact_min: f64,
    approx_min: f64,
    acc: T,
}

impl ConstellationTable {
    /// Enumerates `vc`, refusing more than `limit` points or a table above 2 GiB.
    pub fn build(vc: &VoronoiConstellation, limit: u64) -> Result<Self> {
        let n = vc.dim();
        let m =
            vc.size_u64()
                .filter(|&m| m <= limit)
                .ok_or_else(|| Error::TooLargeToEnumerate {
                    what: "constellation table",
                    size: u128::try_from(vc.size()).unwrap_or(u128::MAX),
                    limit: limit as u128,
                })?;
        let labelled = vc.bits_per_symbol().is_ok_and(|b| b <= 64);
        let padded = m.div_ceil(BLOCK as u64) * BLOCK as u64;
        let bytes = padded * (2 * n as u64 + if labelled { 8 } else { 0 });
        if bytes > MEMORY_GUARD {
            return Err(Error::TooLargeToEnumerate {
                what: "constellation table bytes",
                size: bytes as u128,
                limit: MEMORY_GUARD as u128,
            });
        }
        let denom = vc.coding().denom() as f64;
        let offset = vc.offset().to_vec();
        let mut wide = vec![0i16; padded as usize * n];
        let mut labels = labelled.then(|| Vec::with_capacity(m as usize));
        let mut bad = None;
        let mut reach = 0.0f64;
        let mut k = 0usize;
        vc.for_each_point(limit, |u, x| {
            let base = (k / BLOCK) * BLOCK * n + k % BLOCK;
            for (j, (xi, ai)) in x.iter().zip(&offset).enumerate() {
                let v = denom * (xi + ai);
                let r = v.round();
                if (v - r).abs() > 1e-6 || r.abs() > i16::MAX as f64 {
                    bad.get_or_insert(v);
                }
                reach = reach.max(r.abs());
                wide[base + j * BLOCK] = r as i16;
            }
            if let Some(l) = labels.as_mut() {
                l.push(vc.packed_label(u).unwrap());
            }
            k += 1;
        })?;
        if let Some(v) = bad {
            return Err(contract(format!(
                "coordinate {v} does not fit the integer table"
            )));
        }
        for kk in k..padded as usize {
            let base = (kk / BLOCK) * BLOCK * n + kk % BLOCK;
            for j in 0..n {
                wide[base + j * BLOCK] = wide[j * BLOCK];
            }
        }
        let blocks = if reach <= i8::MAX as f64 {
            Blocks::Narrow(wide.iter().map(|&c| c as i8).collect())
        } else {
            Blocks::Wide(wide)
        };
        Ok(ConstellationTable {
            n,
            len: k,
            denom,
            offset,
            blocks,
            labels,
            bits: if labelled { vc.bits_per_symbol()? } else { 0 },
            log_m: (m as f64).ln(),
            reach,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `ln M`.
    pub fn log_size(&self) -> f64 {
        self.log_m
    }

    /// Label length, zero when the table carries no labels.
    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    fn stored(&self, k: usize, j: usize) -> f64 {
        let at = (k / BLOCK) * BLOCK * self.n + j * BLOCK + k % BLOCK;
        match &self.blocks {
            Blocks::Narrow(b) => b[at].into(),
            Blocks::Wide(b) => b[at].into(),
        }
    }

    /// Point `i` as floating-point coordinates.
    pub fn point(&self, i: usize) -> Vec<f64> {
        assert!(i < self.len, "point index out of range");
        (0..self.n)
            .map(|j| self.stored(i, j) / self.denom - self.offset[j])
            .collect()
    }

    fn scaled_target(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.offset)
            .map(|(yi, ai)| self.denom * (yi + ai))
            .collect()
    }

    /// Bound on `|d_f32 − d_f64|` for any stored point, scaled units.
    fn f32_tolerance(&self, z: &[f64]) -> f64 {
        let zmax = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let span = zmax + self.reach;
        1e-5 * (1.0 + self.n as f64 * span * span)
    }

    /// Scans every block: points with prefiltered distance at most `limit + tol`
    /// are re-measured exactly and passed to `acc(k, d)` when `d ≤ limit`.
    fn pass<T: Send>(
        &self,
        z: &[f64],
        limit: f64,
        init: impl Fn() -> T + Sync + Send,
        acc: impl Fn(&mut T, usize, f64) + Sync + Send,
        merge: impl Fn(T, T) -> T + Sync + Send,
    ) -> Pass<T> {
        match &self.blocks {
            Blocks::Narrow(b) => self.pass_over(b, z, limit, init, acc, merge),
            Blocks::Wide(b) => self.pass_over(b, z, limit, init, acc, merge),
        }
    }

    fn pass_over<S: Coord, T: Send>(
        &self,
        blocks: &[S],
        z: &[f64],
        limit: f64,
        init: impl Fn() -> T + Sync + Send,
        acc: impl Fn(&mut T, usize, f64) + Sync + Send,
        merge: impl Fn(T, T) -> T + Sync + Send,
    ) -> Pass<T> {
        let n = self.n;
        let z32: Vec<f32> = z.iter().map(|&v| v as f32).collect();
        let gate = (limit + self.f32_tolerance(z)) as f32;
        let task = BLOCK * n * BLOCKS_PER_TASK;
        blocks
            .par_chunks(task)
            .enumerate()
            .map(|(ti, chunk)| {
                let mut p = Pass {
                    exact_min: f64::INFINITY,
                    approx_min: f32::INFINITY as f64,
                    acc: init(),
                };
                let mut d32 = [0f32; BLOCK];
                for (bi, blk) in chunk.chunks_exact(BLOCK * n).enumerate() {
                    block_distances(&z32, blk, &mut d32);
                    let bmin = lane_min(&d32);
                    p.approx_min = p.approx_min.min(bmin as f64);
                    if bmin > gate {
                        continue;
                    }
                    let first = (ti * BLOCKS_PER_TASK + bi) * BLOCK;
                    for (l, &d) in d32.iter().enumerate() {
                        if d > gate || first + l >= self.len {
                            continue;
                        }
                        let exact: f64 = (0..n)
                            .map(|j| (z[j] - Into::<f64>::into(blk[j * BLOCK + l])).powi(2))
                            .sum();
                        p.exact_min = p.exact_min.min(exact);
                        if exact <= limit {
                            acc(&mut p.acc, first + l, exact);
                        }
                    }
                }
                p
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(
                Pass {
                    exact_min: f64::INFINITY,
                    approx_min: f64::INFINITY,
                    acc: init(),
                },
                |a, b| Pass {
                    exact_min: a.exact_min.min(b.exact_min),
                    approx_min: a.approx_min.min(b.approx_min),
                    acc: merge(a.acc, b.acc),
                },
            )
    }

    fn min_scaled(&self, z: &[f64]) -> f64 {
        let coarse = self.pass(z, f64::NEG_INFINITY, || (), |_, _, _| (), |_, _| ());
        let fine = self.pass(
            z,
            coarse.approx_min + self.f32_tolerance(z),
            || (),
            |_, _, _| (),
            |_, _| (),
        );
        fine.exact_min
    }

    /// Smallest `‖y − x‖²` over the table.
    pub fn min_distance2(&self, y: &[f64]) -> f64 {
        self.min_scaled(&self.scaled_target(y)) / (self.denom * self.denom)
    }

    /// Accumulates `acc(k, exp(−(‖y − x_k‖² − base)/(2v)))` over every point within
    /// `cutoff` of the nearest, returning `(d²_min, base)`.
    ///
    /// The first pass references `‖z − ⌊z⌉‖²`, a lower bound on every distance; a
    /// second pass referenced to the true minimum runs only when that bound is loose.
    fn weighted<T: Send>(
        &self,
        y: &[f64],
        v: f64,
        cutoff: f64,
        init: impl Fn() -> T + Sync + Send + Copy,
        acc: impl Fn(&mut T, usize, f64) + Sync + Send + Copy,
        merge: impl Fn(T, T) -> T + Sync + Send + Copy,
    ) -> (f64, f64, T) {
        let z = self.scaled_target(y);
        let s2 = self.denom * self.denom;
        let inv = 1.0 / (2.0 * v * s2);
        let span = 2.0 * v * s2;
        let window = cutoff + self.log_m + SLACK;
        let lb: f64 = z.iter().map(|zi| (zi - zi.round()).powi(2)).sum();
        let weigh =
            move |t: &mut T, k: usize, d: f64, base: f64| acc(t, k, (-(d - base) * inv).exp());
        let first = self.pass(
            &z,
            lb + window * span,
            init,
            |t, k, d| weigh(t, k, d, lb),
            merge,
        );
        if first.exact_min <= lb + (window - cutoff) * span {
            return (first.exact_min / s2, lb / s2, first.acc);
        }
        let d0 = self.min_scaled(&z);
        let second = self.pass(
            &z,
            d0 + cutoff * span,
            init,
            |t, k, d| weigh(t, k, d, d0),
            merge,
        );
        (d0 / s2, d0 / s2, second.acc)
    }

    /// `(d²_min, ln Σ_x exp(−(‖y−x‖² − d²_min)/(2v)))`, skipping terms below `e^{−cutoff}`
    /// of the largest.
    pub fn log_sum_exp(&self, y: &[f64], v: f64, cutoff: f64) -> (f64, f64) {
        let (d0, base, sum) = self.weighted(y, v, cutoff, || 0.0, |s, _, w| *s += w, |a, b| a + b);
        (d0, sum.ln() + (d0 - base) / (2.0 * v))
    }

    /// Per-bit sums of `exp(−(‖y−x‖² − d²_min)/(2v))` over points whose bit is 0 and 1.
    pub fn bit_class_sums(&self, y: &[f64], v: f64, cutoff: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| contract("table has no labels"))?;
        let bits = self.bits;
        let (d0, base, (mut s0, mut s1)) = self.weighted(
            y,
            v,
            cutoff,
            || (vec![0.0; bits], vec![0.0; bits]),
            |(s0, s1), k, w| {
                let lab = labels[k];
                for b in 0..bits {
                    if lab >> (bits - 1 - b) & 1 == 1 {
                        s1[b] += w;
                    } else {
                        s0[b] += w;
                    }
                }
            },
            |(mut a0, mut a1), (b0, b1)| {
                for b in 0..a0.len() {
                    a0[b] += b0[b];
                    a1[b] += b1[b];
                }
                (a0, a1)
            },
        );
        let scale = ((d0 - base) / (2.0 * v)).exp();
        s0.iter_mut().chain(s1.iter_mut()).for_each(|s| *s *= scale);
        Ok((s0, s1))
    }
}

/// Smallest lane, written to vectorize.
#[inline]
fn lane_min(d: &[f32; BLOCK]) -> f32 {
    let mut m = [f32::INFINITY; 8];
    for c in d.chunks_exact(8) {
        for i in 0..8 {
            m[i] = if c[i] < m[i] { c[i] } else { m[i] };
        }
    }
    m.iter()
        .fold(f32::INFINITY, |a, &b| if b < a { b } else { a })
}

/// `f32` squared distances from `z` to the `BLOCK` points of one block.
#[inline]
fn block_distances<S: Coord>(z: &[f32], blk: &[S], out: &mut [f32; BLOCK]) {
    *out = [0.0; BLOCK];
    for (j, &zj) in z.iter().enumerate() {
        let row: &[S; BLOCK] = blk[j * BLOCK..(j + 1) * BLOCK].try_into().unwrap();
        for l in 0..BLOCK {
            let t = zj - Into::<f32>::into(row[l]);
            out[l] += t * t;
        }
    }
}
