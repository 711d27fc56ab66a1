//! Bit LLRs `ln Pr(b = 0 | y) / Pr(b = 1 | y)` under the pseudo-Gray labels.

use super::{AwgnChannel, ConstellationTable};
use crate::error::{contract, Error, Result};
use crate::lattices::quantizers::round_half_down;
use crate::shells::{ball_cardinality, for_each_shell_point, ENUMERATION_CAP};
use crate::vc::{Scratch, VoronoiConstellation};

/// Magnitude at which exact LLRs saturate; terms below `e^{−700}` of the largest are dropped.
pub const EXACT_LLR_CLAMP: f64 = 700.0;

/// Important-set radius and the default squared distance for empty bit classes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LlrParams {
    pub r2: u64,
    pub q: f64,
}

impl LlrParams {
    /// Requires `q > R²`.
    pub fn new(r2: u64, q: f64) -> Result<Self> {
        if !(q > r2 as f64) {
            return Err(contract(format!(
                "default distance q = {q} must exceed R² = {r2}"
            )));
        }
        Ok(LlrParams { r2, q })
    }

    /// Starting point `q = 2.5·R²` (at least `R² + 1`).
    pub fn with_default_q(r2: u64) -> Self {
        LlrParams {
            r2,
            q: (2.5 * r2 as f64).max(r2 as f64 + 1.0),
        }
    }
}

/// Integer vectors of squared norm at most `R²`.
#[derive(Clone, Debug)]
pub struct BallOffsets {
    n: usize,
    r2: u64,
    flat: Vec<i64>,
}

impl BallOffsets {
    pub fn new(n: usize, r2: u64) -> Result<Self> {
        let size = ball_cardinality(n, r2)?;
        if size > ENUMERATION_CAP {
            return Err(Error::TooLargeToEnumerate {
                what: "important-set ball",
                size: size as u128,
                limit: ENUMERATION_CAP as u128,
            });
        }
        let mut flat = Vec::with_capacity(size as usize * n);
        for k in 0..=r2 {
            for_each_shell_point(n, k, |v| flat.extend_from_slice(v))?;
        }
        Ok(BallOffsets { n, r2, flat })
    }

    pub fn r2(&self) -> u64 {
        self.r2
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.n.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }
}

/// Important-set LLRs: per bit, the nearest point of each class inside `I(y, R)`,
/// with `q` standing in for an empty class, scaled by `−1/(2σ²/n)`.
pub fn llr_approx(
    vc: &VoronoiConstellation,
    ch: &AwgnChannel,
    ball: &BallOffsets,
    params: &LlrParams,
    y: &[f64],
    scratch: &mut Scratch,
    out: &mut [f64],
) -> Result<()> {
    let n = vc.dim();
    let bits = vc.bits_per_symbol()?;
    if bits > 64 || out.len() != bits || y.len() != n || ball.n != n {
        return Err(contract("llr_approx: dimension or label-length mismatch"));
    }
    if ball.r2 != params.r2 || !(params.q > params.r2 as f64) {
        return Err(contract(
            "llr_approx: ball radius differs from params or q ≤ R²",
        ));
    }
    let a = vc.offset();
    let mut center = vec![0i64; n];
    let mut frac = vec![0.0; n];
    for i in 0..n {
        let z = y[i] + a[i];
        let c = round_half_down(z);
        center[i] = c as i64;
        frac[i] = z - c;
    }
    let mut min0 = vec![params.q; bits];
    let mut min1 = vec![params.q; bits];
    let mut x = vec![0.0; n];
    let mut u = vec![0i64; n];
    for sv in ball.flat.chunks_exact(n) {
        for i in 0..n {
            x[i] = (center[i] + sv[i]) as f64 - a[i];
        }
        if !vc.in_region(&x, scratch) {
            continue;
        }
        let d2: f64 = frac
            .iter()
            .zip(sv)
            .map(|(e, &s)| (e - s as f64).powi(2))
            .sum();
        vc.decode_into(&x, scratch, &mut u);
        let label = vc.packed_label(&u)?;
        for b in 0..bits {
            let m = if label >> (bits - 1 - b) & 1 == 1 {
                &mut min1[b]
            } else {
                &mut min0[b]
            };
            if d2 < *m {
                *m = d2;
            }
        }
    }
    let inv = 1.0 / (2.0 * ch.variance());
    for b in 0..bits {
        out[b] = -(min0[b] - min1[b]) * inv;
    }
    Ok(())
}

/// Exact LLRs over the whole constellation, saturating at [`EXACT_LLR_CLAMP`].
pub fn llr_exact(
    table: &ConstellationTable,
    ch: &AwgnChannel,
    y: &[f64],
    out: &mut [f64],
) -> Result<()> {
    if out.len() != table.bits_per_symbol() || y.len() != table.dim() {
        return Err(contract("llr_exact: dimension or label-length mismatch"));
    }
    let (s0, s1) = table.bit_class_sums(y, ch.variance(), EXACT_LLR_CLAMP)?;
    for b in 0..out.len() {
        let v = s0[b].ln() - s1[b].ln();
        out[b] = if v.is_nan() {
            0.0
        } else {
            v.clamp(-EXACT_LLR_CLAMP, EXACT_LLR_CLAMP)
        };
    }
    Ok(())
}
